//! Experiment pipelines behind the command-line subcommands.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::grid::ScalarFunction;
use crate::report::{Cell, Comparison, ExperimentReport, Provenance, ReportRow, Table};
use crate::stable::{stable_pdf, stable_pdf_deriv, stable_pdf_drho, StableDensityParams};
use crate::verify::{Criterion, Verifier, CRITERIA};
use crate::zygmund::{dyadic_h_set, local_exponent};

/// Experiment identifiers accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Density,
    Kernel,
    Holder,
    Generator,
    Schauder,
    Mc,
    VerifyAll,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Density,
        Experiment::Kernel,
        Experiment::Holder,
        Experiment::Generator,
        Experiment::Schauder,
        Experiment::Mc,
        Experiment::VerifyAll,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Density => "density",
            Experiment::Kernel => "kernel",
            Experiment::Holder => "holder",
            Experiment::Generator => "generator",
            Experiment::Schauder => "schauder",
            Experiment::Mc => "mc",
            Experiment::VerifyAll => "verify-all",
        }
    }

    /// Acceptance checks folded into this experiment.
    pub fn criteria(self) -> Vec<usize> {
        match self {
            Experiment::Density => vec![],
            Experiment::Kernel => vec![3, 4, 5],
            Experiment::Holder => vec![6, 15],
            Experiment::Generator => vec![9, 10, 11],
            Experiment::Schauder => vec![7, 8],
            Experiment::Mc => vec![12, 13, 14],
            Experiment::VerifyAll => (1..=CRITERIA.len()).collect(),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Run `which` and return its report. `on_criterion` sees each acceptance check as it finishes.
pub fn run_experiment(cfg: &ExperimentConfig, which: Experiment, mut on_criterion: impl FnMut(&Criterion)) -> Result<ExperimentReport> {
    let start = Instant::now();
    let id = which.as_str().replace('-', "_");
    let mut report = ExperimentReport::new(id, cfg.seed, cfg.echo());
    match which {
        Experiment::Density => density(cfg, &mut report)?,
        Experiment::Kernel => kernel_table(cfg, &mut report)?,
        Experiment::Holder => holder_table(cfg, &mut report)?,
        _ => {}
    }
    let ids = which.criteria();
    if !ids.is_empty() {
        let verifier = Verifier::new(cfg.clone())?;
        for c in ids {
            let crit = verifier.run(c)?;
            on_criterion(&crit);
            let prefix = format!("c{:02}_{}", crit.id, crit.name);
            for r in &crit.rows {
                report.rows.push(ReportRow { quantity: format!("{prefix}:{}", r.quantity), ..r.clone() });
            }
            if crit.time_budget_s.is_some() {
                report.rows.push(ReportRow::flag(format!("{prefix}:within_time_budget"), crit.within_budget(), Provenance::ClosedForm));
            }
            report.tables.extend(crit.tables);
        }
    }
    if which == Experiment::Mc {
        merge_tables(&mut report, "mc_checks_", "mc_checks");
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn merge_tables(report: &mut ExperimentReport, prefix: &str, name: &str) {
    let (parts, rest): (Vec<Table>, Vec<Table>) = report.tables.drain(..).partition(|t| t.name.starts_with(prefix));
    report.tables = rest;
    if let Some(first) = parts.first() {
        let mut merged = Table { name: name.to_string(), header: first.header.clone(), rows: Vec::new() };
        for t in parts {
            merged.rows.extend(t.rows);
        }
        report.tables.push(merged);
    }
}

/// Orders examined by the density experiment.
fn density_orders(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let field = cfg.alpha_field()?;
    Ok(match field.constant_value() {
        Some(c) => vec![c],
        None => vec![field.alpha_low, field.alpha_high],
    })
}

fn density(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let xs = cfg.grid.axis();
    for rho in density_orders(cfg)? {
        for &t in &cfg.time_points {
            let p = StableDensityParams::new(rho, t, 1)?;
            let mut table = Table::new(format!("density_rho{rho}_t{t}"), &["x", "p", "p'", "p''", "dp_drho"]);
            let mut closed_err: f64 = 0.0;
            let mut scaling_err: f64 = 0.0;
            let floor = 1e-6 * stable_pdf(&p, &[0.0])?;
            for &x in &xs {
                let v = stable_pdf(&p, &[x])?;
                let d1 = stable_pdf_deriv(&p, &[x], &[1])?;
                let d2 = stable_pdf_deriv(&p, &[x], &[2])?;
                let dr = match stable_pdf_drho(&p, &[x]) {
                    Ok(v) => Cell::from(v),
                    Err(Error::Param(_)) if rho >= 2.0 => Cell::Text(String::new()),
                    Err(e) => return Err(e),
                };
                table.push([x.into(), v.into(), d1.into(), d2.into(), dr]);
                if let Some(exact) = closed_form(rho, t, x) {
                    closed_err = closed_err.max((v - exact).abs());
                }
                let s = t.powf(-1.0 / rho);
                let unit = s * stable_pdf(&StableDensityParams::new(rho, 1.0, 1)?, &[s * x])?;
                if unit >= floor {
                    scaling_err = scaling_err.max((v - unit).abs() / unit);
                }
            }
            report.tables.push(table);
            if let Some(label) = closed_form_label(rho) {
                report.rows.push(ReportRow::new(
                    format!("{label}_rho{rho}_t{t}"),
                    closed_err,
                    0.0,
                    cfg.tol("closed_form"),
                    Comparison::AtMost,
                    Provenance::ClosedForm,
                ));
            }
            report.rows.push(ReportRow::new(
                format!("self_similarity_rho{rho}_t{t}"),
                scaling_err,
                0.0,
                cfg.tol("self_similarity"),
                Comparison::AtMost,
                Provenance::Scaling,
            ));
        }
    }
    Ok(())
}

fn closed_form_label(rho: f64) -> Option<&'static str> {
    if rho == 2.0 {
        Some("gaussian_closed_form")
    } else if rho == 1.0 {
        Some("cauchy_closed_form")
    } else {
        None
    }
}

fn closed_form(rho: f64, t: f64, x: f64) -> Option<f64> {
    use std::f64::consts::PI;
    if rho == 2.0 {
        Some((-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt())
    } else if rho == 1.0 {
        Some(t / (PI * (t * t + x * x)))
    } else {
        None
    }
}

fn kernel_table(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let verifier = Verifier::new(cfg.clone())?;
    let k = verifier.kernel()?;
    let mut table = Table::new("kernel", &["t", "x", "y", "p", "p0", "correction", "iterates", "est_error"]);
    for &t in &cfg.time_points {
        for &x in &cfg.probes {
            for &y in &cfg.probes {
                let e = k.transition_density(t, x, y)?;
                table.push([
                    t.into(),
                    x.into(),
                    y.into(),
                    e.value.into(),
                    e.p0_part.into(),
                    e.correction_part.into(),
                    e.iterates_used.into(),
                    Cell::from(e.est_error),
                ]);
            }
        }
    }
    report.tables.push(table);
    Ok(())
}

/// Local exponents of `|x − c|^{α(c)}` profiles, one cusp per probe.
fn holder_table(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let field = cfg.alpha_field()?;
    let margin = cfg.tol("holder_margin");
    let h_set = dyadic_h_set(0.1, 8);
    let mut table = Table::new("holder", &["x", "kappa_hat", "constant_hat", "r2", "flag"]);
    for &c in &cfg.probes {
        let a = field.eval(c);
        let f = move |x: f64| (x - c).abs().powf(a) * (-(x - c) * (x - c)).exp();
        let r = local_exponent(&f as &dyn ScalarFunction, c, &h_set, 2);
        table.push([c.into(), r.kappa_hat.into(), r.constant_hat.into(), r.r2.into(), r.flag.as_str().into()]);
        report.rows.push(ReportRow::new(format!("cusp_kappa_hat_x{c}"), r.kappa_hat, a, margin, Comparison::Within, Provenance::ClosedForm));
    }
    report.tables.push(table);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
        assert!(matches!("plot".parse::<Experiment>(), Err(Error::Config(_))));
    }

    #[test]
    fn gaussian_density_experiment_passes() {
        let cfg = ExperimentConfig::parse("alpha.kind = constant\nalpha.params = 2\ngrid.n = 41\ntime.points = 0.1, 1").unwrap();
        let r = run_experiment(&cfg, Experiment::Density, |_| {}).unwrap();
        assert!(r.pass(), "{:?}", r.rows);
        assert!(r.rows.iter().any(|row| row.quantity.starts_with("gaussian_closed_form")));
        assert_eq!(r.tables.len(), 2);
        assert_eq!(r.tables[0].header, ["x", "p", "p'", "p''", "dp_drho"]);
    }

    #[test]
    fn holder_cusps_recover_the_order() {
        let cfg = ExperimentConfig::default();
        let mut report = ExperimentReport::new("holder", 0, vec![]);
        holder_table(&cfg, &mut report).unwrap();
        assert!(report.pass(), "{:?}", report.rows);
        assert_eq!(report.tables[0].rows.len(), cfg.probes.len());
    }
}
