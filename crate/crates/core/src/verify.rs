//! The fifteen acceptance checks, shared by the test suite and the `verify-all` command.

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::field::{ls_slope, AlphaField, ScaleField};
use crate::montecarlo::{
    dynkin_residual, empirical_semigroup, simulate_levy, simulate_sde, simulate_stable_like, smalltime_levy_estimate, SmallTimeSettings, StopRule,
};
use crate::generator::{carre_du_champ, extended_generator_limit_parametrix, frac_laplacian_varorder, GeneratorQuadrature};
use crate::parametrix::{ParametrixKernel, ParametrixSettings};
use crate::report::{Cell, Comparison, ExperimentReport, Provenance, ReportRow, Table};
use crate::stable::stable_pdf_1d;
use crate::grid::ScalarFunction;
use crate::symbol::Symbol;
use crate::zygmund::{dyadic_h_set, interp_bound_check, local_exponent, mixed_difference_constant};

/// Short names of the checks, indexed from 1.
pub const CRITERIA: [&str; 15] = [
    "closed_form_densities",
    "self_similarity",
    "constant_order_degeneracy",
    "mass_conservation",
    "phi_norm_scaling",
    "semigroup_holder",
    "schauder_bounded_rhs",
    "schauder_holder_rhs",
    "generator_consistency",
    "symbol_eigen_identity",
    "carre_du_champ_product",
    "mc_vs_parametrix",
    "dynkin_residual",
    "smalltime_levy_limit",
    "interpolation_inequalities",
];

/// Columns of Schauder tables.
pub const SCHAUDER_COLUMNS: &[&str] = &["probe_x", "alpha_x", "kappa_hat", "target", "pass"];

/// Columns of Monte Carlo check tables.
pub const MC_COLUMNS: &[&str] = &["check", "estimate", "target", "stderr", "pass"];

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub rows: Vec<ReportRow>,
    pub tables: Vec<Table>,
    pub elapsed_s: f64,
    pub time_budget_s: Option<f64>,
}

impl Criterion {
    pub fn within_budget(&self) -> bool {
        self.time_budget_s.is_none_or(|b| self.elapsed_s <= b)
    }

    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass) && self.within_budget()
    }

    /// One human-readable status line.
    pub fn summary(&self) -> String {
        let worst = self.rows.iter().find(|r| !r.pass).or(self.rows.first());
        let detail = worst.map_or(String::new(), |r| {
            format!("{} value={:.4e} target={:.4e} tol={:.1e}", r.quantity, r.value, r.target, r.tolerance)
        });
        let budget = if self.within_budget() { "" } else { " [over time budget]" };
        format!(
            "criterion {:>2} {:<28} {} ({:.1}s) {detail}{budget}",
            self.id,
            self.name,
            if self.pass() { "PASS" } else { "FAIL" },
            self.elapsed_s
        )
    }
}

/// Runs checks against one configuration, sharing expensive kernels between them.
pub struct Verifier {
    pub cfg: ExperimentConfig,
    pub field: AlphaField,
    pub settings: ParametrixSettings,
    kernel: Mutex<Option<Arc<ParametrixKernel>>>,
}

impl Verifier {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        let field = cfg.alpha_field()?;
        let settings = ParametrixSettings { horizon: cfg.horizon, ..ParametrixSettings::default() };
        Ok(Self { cfg, field, settings, kernel: Mutex::new(None) })
    }

    /// Parametrix kernel of the configured order field, built on first use.
    pub fn kernel(&self) -> Result<Arc<ParametrixKernel>> {
        let mut slot = self.kernel.lock().expect("kernel lock");
        if let Some(k) = slot.as_ref() {
            return Ok(k.clone());
        }
        let k = Arc::new(ParametrixKernel::new(Symbol::new(self.field.clone()), self.settings.clone())?);
        *slot = Some(k.clone());
        Ok(k)
    }

    fn constant_kernel(&self, alpha: f64) -> Result<ParametrixKernel> {
        ParametrixKernel::new(Symbol::new(AlphaField::constant(alpha)?), self.settings.clone())
    }

    /// Run check `id` (1-based).
    pub fn run(&self, id: usize) -> Result<Criterion> {
        let name = *CRITERIA
            .get(id.wrapping_sub(1))
            .ok_or_else(|| Error::Param(format!("no criterion {id}")))?;
        let start = Instant::now();
        let mut tables = Vec::new();
        let (rows, budget) = match id {
            1 => (self.closed_form_densities(&mut tables)?, Some(10.0)),
            2 => (self.self_similarity()?, None),
            3 => (self.constant_order_degeneracy()?, None),
            4 => (self.mass_conservation(&mut tables)?, Some(300.0)),
            5 => (self.phi_norm_scaling(&mut tables)?, None),
            6 => (self.semigroup_holder(&mut tables)?, None),
            7 => (self.schauder_bounded(&mut tables)?, None),
            8 => (self.schauder_holder(&mut tables)?, None),
            9 => (self.generator_consistency(&mut tables)?, None),
            10 => (self.symbol_eigen_identity()?, None),
            11 => (self.carre_du_champ_product()?, None),
            12 => (self.mc_vs_parametrix(&mut tables)?, Some(300.0)),
            13 => (self.dynkin(&mut tables)?, None),
            14 => (self.smalltime(&mut tables)?, None),
            15 => (self.interpolation(&mut tables)?, None),
            _ => return Err(Error::Param(format!("criterion {id} not available"))),
        };
        Ok(Criterion { id, name, rows, tables, elapsed_s: start.elapsed().as_secs_f64(), time_budget_s: budget })
    }

    /// Run every check and collect the rows into one report.
    pub fn run_all(&self, mut on_done: impl FnMut(&Criterion)) -> Result<(Vec<Criterion>, ExperimentReport)> {
        let mut report = ExperimentReport::new("verify_all", self.cfg.seed, self.cfg.echo());
        let mut done = Vec::with_capacity(CRITERIA.len());
        for id in 1..=CRITERIA.len() {
            let c = self.run(id)?;
            on_done(&c);
            for r in &c.rows {
                report.rows.push(ReportRow { quantity: format!("c{:02}_{}:{}", c.id, c.name, r.quantity), ..r.clone() });
            }
            if c.time_budget_s.is_some() {
                report.rows.push(ReportRow::flag(format!("c{:02}_{}:within_time_budget", c.id, c.name), c.within_budget(), Provenance::ClosedForm));
            }
            report.tables.extend(c.tables.iter().cloned());
            report.wall_time_s += c.elapsed_s;
            done.push(c);
        }
        Ok((done, report))
    }

    fn closed_form_densities(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("closed_form");
        let mut rows = Vec::new();
        let mut table = Table::new("c01_closed_form", &["rho", "t", "x", "p", "closed_form"]);
        for (rho, label) in [(2.0, "gaussian"), (1.0, "cauchy")] {
            for t in [0.1, 1.0] {
                let mut worst: f64 = 0.0;
                for i in 0..=400 {
                    let x = -10.0 + 0.05 * i as f64;
                    let exact = if rho == 2.0 {
                        (-x * x / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
                    } else {
                        t / (PI * (t * t + x * x))
                    };
                    let p = stable_pdf_1d(rho, t, x)?;
                    worst = worst.max((p - exact).abs());
                    if i % 20 == 0 {
                        table.push([rho.into(), t.into(), x.into(), p.into(), Cell::from(exact)]);
                    }
                }
                rows.push(ReportRow::new(format!("{label}_t{t}_max_abs_err"), worst, 0.0, tol, Comparison::AtMost, Provenance::ClosedForm));
            }
        }
        tables.push(table);
        Ok(rows)
    }

    fn self_similarity(&self) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("self_similarity");
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut rows = Vec::new();
        for rho in [0.8, 1.5, 1.9] {
            let mut worst: f64 = 0.0;
            for _ in 0..100 {
                let t = 0.05 * 40f64.powf(rng.random::<f64>());
                let x = rng.random_range(-6.0..6.0);
                let lhs = stable_pdf_1d(rho, t, x)?;
                let s = t.powf(-1.0 / rho);
                let rhs = s * stable_pdf_1d(rho, 1.0, s * x)?;
                worst = worst.max((lhs - rhs).abs() / rhs.abs());
            }
            rows.push(ReportRow::new(format!("rho{rho}_max_rel_err"), worst, 0.0, tol, Comparison::AtMost, Provenance::Scaling));
        }
        Ok(rows)
    }

    fn constant_order_degeneracy(&self) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("degeneracy");
        let k = self.constant_kernel(1.5)?;
        let mut rows = Vec::new();
        for t in [0.1, 0.3] {
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                for j in 0..20 {
                    let x = -3.0 + 6.0 * i as f64 / 19.0;
                    let y = -3.0 + 6.0 * j as f64 / 19.0;
                    let got = k.transition_density(t, x, y)?.value;
                    worst = worst.max((got - stable_pdf_1d(1.5, t, x - y)?).abs());
                }
            }
            rows.push(ReportRow::new(format!("t{t}_max_abs_err"), worst, 0.0, tol, Comparison::AtMost, Provenance::ClosedForm));
        }
        Ok(rows)
    }

    fn mass_conservation(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("mass");
        let k = self.kernel()?;
        let mut table = Table::new("c04_mass", &["t", "x", "p0_mass", "tail_mass", "correction_mass", "total"]);
        let mut rows = Vec::new();
        for &t in &self.cfg.time_points {
            let mut worst: f64 = 0.0;
            for &x in &self.cfg.probes {
                let m = k.mass(t, x, 20.0)?;
                worst = worst.max((m.total() - 1.0).abs());
                table.push([t.into(), x.into(), m.p0_mass.into(), m.tail_mass.into(), m.correction_mass.into(), Cell::from(m.total())]);
            }
            rows.push(ReportRow::new(format!("t{t}_max_abs_defect"), worst, 0.0, tol, Comparison::AtMost, Provenance::QuadratureOracle));
        }
        tables.push(table);
        Ok(rows)
    }

    fn phi_norm_scaling(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let k = self.kernel()?;
        let rows_x: Vec<f64> = (0..8).map(|i| -PI + PI * i as f64 / 4.0).collect();
        let norms = k.phi_row_norms(&rows_x);
        let mut table = Table::new("c05_phi_norms", &["t", "sup_l1"]);
        let pts: Vec<(f64, f64)> = norms
            .iter()
            .inspect(|(t, n)| table.push([Cell::from(*t), Cell::from(*n)]))
            .filter(|(t, _)| (0.05..=0.5).contains(t))
            .map(|(t, n)| (t.ln(), n.ln()))
            .collect();
        tables.push(table);
        if pts.len() < 3 {
            return Err(Error::Param("too few lattice times in [0.05, 0.5]".into()));
        }
        let rate = ls_slope(&pts) + 1.0;
        Ok(vec![ReportRow::new("lambda_hat", rate, self.cfg.tol("phi_rate"), 0.0, Comparison::AtLeast, Provenance::Scaling)])
    }

    /// Position where the order field attains its infimum, searched on one period window.
    fn order_minimum(&self) -> f64 {
        (0..=4000)
            .map(|i| -PI + 2.0 * PI * i as f64 / 4000.0)
            .min_by(|a, b| self.field.eval(*a).total_cmp(&self.field.eval(*b)))
            .unwrap_or(0.0)
    }

    fn semigroup_holder(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let k = self.kernel()?;
        let alpha_low = self.field.alpha_low;
        let margin = self.cfg.tol("holder_margin");
        let kappa = alpha_low - margin;
        let x0 = self.order_minimum();
        let step = move |x: f64| if x > x0 { 1.0 } else { 0.0 };
        let prop = k.propagate_fn(&step);
        let offsets = [-0.2, -0.1, 0.0, 0.1, 0.2];
        let h_set = dyadic_h_set(0.02, 6);
        let mut table = Table::new("c06_semigroup_holder", &["t", "x", "kappa_hat", "flag", "prefactor"]);
        let mut rows = Vec::new();
        let mut prefactors = Vec::new();
        for t in [0.02, 0.04, 0.08, 0.16, 0.32] {
            let pt = k.semigroup_values(&prop, t)?;
            let mut prefactor: f64 = 0.0;
            for i in 0..=80 {
                let x = x0 - 0.2 + 0.005 * i as f64;
                for h in [0.004, 0.002, 0.001] {
                    prefactor = prefactor.max((pt.value(x + h) - pt.value(x)).abs() / h.powf(kappa));
                }
            }
            prefactors.push((t.ln(), prefactor.ln()));
            for d in offsets {
                let r = local_exponent(&pt, x0 + d, &h_set, 2);
                table.push([t.into(), (x0 + d).into(), r.kappa_hat.into(), r.flag.as_str().into(), Cell::from(prefactor)]);
                if t == 0.08 {
                    rows.push(ReportRow::new(format!("kappa_hat_x{:.3}", x0 + d), r.kappa_hat, alpha_low, margin, Comparison::AtLeast, Provenance::Scaling));
                }
            }
        }
        tables.push(table);
        let slope = ls_slope(&prefactors);
        rows.push(ReportRow::new("prefactor_slope", slope, -kappa / alpha_low, self.cfg.tol("prefactor_slope"), Comparison::Within, Provenance::Scaling));
        Ok(rows)
    }

    /// Probes spanning the range of the order field, including its extremes.
    fn spread_probes(&self, count: usize) -> Vec<f64> {
        let lo = self.order_minimum();
        let hi = lo + PI;
        (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
    }

    fn schauder_bounded(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let k = self.kernel()?;
        let lambda = self.cfg.lambda;
        let margin = self.cfg.tol("schauder_bounded");
        let probes = self.spread_probes(5);
        let steps = {
            let p = probes.clone();
            move |x: f64| p.iter().enumerate().map(|(j, &c)| if x > c { if j % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 }).sum::<f64>()
        };
        let bump = |x: f64| (-x * x).exp();
        let sources: [(&str, &dyn Fn(f64) -> f64); 2] = [("bump", &bump), ("steps", &steps)];
        let h_set = dyadic_h_set(0.05, 6);
        let mut rows = Vec::new();
        for (label, h) in sources {
            let mut table = Table::new(format!("schauder_bounded_{label}"), SCHAUDER_COLUMNS);
            let f = k.resolvent(&h, lambda)?;
            for &x in &probes {
                let a = self.field.eval(x);
                let r = local_exponent(&f, x, &h_set, 2);
                let row = ReportRow::new(format!("{label}_kappa_hat_x{x:.3}"), r.kappa_hat, a, margin, Comparison::AtLeast, Provenance::Scaling);
                table.push([x.into(), a.into(), r.kappa_hat.into(), (a - margin).into(), Cell::from(row.pass)]);
                rows.push(row);
            }
            tables.push(table);
        }
        Ok(rows)
    }

    fn schauder_holder(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let k = self.kernel()?;
        let lambda = self.cfg.lambda;
        let margin = self.cfg.tol("schauder_holder");
        let gamma = self.field.holder_gamma;
        let probes = self.spread_probes(3);
        let cusps = {
            let p = probes.clone();
            move |x: f64| p.iter().map(|&c| (x - c).abs().sqrt() * (-(x - c) * (x - c)).exp()).sum::<f64>()
        };
        let (f, g) = k.poisson_pair(&cusps, lambda)?;
        let h_set = dyadic_h_set(0.1, 5);
        let mut table = Table::new("schauder_holder", SCHAUDER_COLUMNS);
        let mut rhs = Table::new("schauder_holder_rhs_order", &["probe_x", "g_order_hat"]);
        let mut rows = Vec::new();
        for &x in &probes {
            let a = self.field.eval(x);
            let g_order = local_exponent(&g, x, &h_set, 1).kappa_hat;
            rows.push(ReportRow::new(format!("g_order_hat_x{x:.3}"), g_order, 0.5, self.cfg.tol("rhs_order"), Comparison::Within, Provenance::Scaling));
            let kappa = local_exponent(&f, x, &h_set, 3).kappa_hat;
            let target = a + g_order.min(gamma);
            let row = ReportRow::new(format!("kappa_hat_x{x:.3}"), kappa, target, margin, Comparison::AtLeast, Provenance::Scaling);
            rhs.push([x.into(), Cell::from(g_order)]);
            table.push([x.into(), a.into(), kappa.into(), (target - margin).into(), Cell::from(row.pass)]);
            rows.push(row);
        }
        tables.push(table);
        tables.push(rhs);
        let mids: Vec<f64> = probes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let times: Vec<f64> = (0..5).map(|j| 0.04 * 0.5f64.powi(j)).collect();
        let limits = extended_generator_limit_parametrix(&k, &f, &mids, &times, self.cfg.tol("extrapolation"))?;
        let gap = mids
            .iter()
            .zip(&limits)
            .map(|(&x, l)| ((l.estimate - g.value(x)) / g.value(x)).abs())
            .fold(0.0, f64::max);
        rows.push(ReportRow::new("inversion_rel_gap", gap, 0.0, self.cfg.tol("generator"), Comparison::AtMost, Provenance::QuadratureOracle));
        Ok(rows)
    }

    fn generator_consistency(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("generator");
        let k = self.kernel()?;
        let quad = GeneratorQuadrature::default();
        let times: Vec<f64> = (0..5).map(|j| 0.04 * 0.5f64.powi(j)).collect();
        let bumps: [(&str, f64, f64); 2] = [("bump_w1", 0.0, 1.0), ("bump_shift", 0.5, 0.5)];
        let mut rows = Vec::new();
        for (label, c, w) in bumps {
            let mut table = Table::new(format!("generator_{label}"), &["x", "Af", "Ae_limit", "rel_gap"]);
            let f = move |x: f64| (-(x - c) * (x - c) / w).exp();
            let limits = extended_generator_limit_parametrix(&k, &f, &self.cfg.probes, &times, self.cfg.tol("extrapolation"))?;
            let mut worst: f64 = 0.0;
            for (&x, lim) in self.cfg.probes.iter().zip(&limits) {
                let af = frac_laplacian_varorder(&f, x, &self.field, &quad)?;
                let gap = ((af - lim.estimate) / af).abs();
                worst = worst.max(gap);
                table.push([x.into(), af.into(), lim.estimate.into(), Cell::from(gap)]);
            }
            rows.push(ReportRow::new(format!("{label}_max_rel_gap"), worst, 0.0, tol, Comparison::AtMost, Provenance::QuadratureOracle));
            tables.push(table);
        }
        Ok(rows)
    }

    fn symbol_eigen_identity(&self) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("symbol");
        let quad = GeneratorQuadrature::default();
        let mut rows = Vec::new();
        for alpha in [0.6, 1.0, 1.5, 1.9] {
            let field = AlphaField::constant(alpha)?;
            let mut worst: f64 = 0.0;
            for xi in [0.5, 1.0, 2.0] {
                let f = move |y: f64| (xi * y).cos();
                for x in [0.0, 0.4] {
                    let got = frac_laplacian_varorder(&f, x, &field, &quad)?;
                    let want = -xi.powf(alpha) * f(x);
                    worst = worst.max(((got - want) / want).abs());
                }
            }
            rows.push(ReportRow::new(format!("alpha{alpha}_max_rel_err"), worst, 0.0, tol, Comparison::AtMost, Provenance::ClosedForm));
        }
        Ok(rows)
    }

    fn carre_du_champ_product(&self) -> Result<Vec<ReportRow>> {
        let tol = self.cfg.tol("carre_du_champ");
        let field = AlphaField::constant(1.5)?;
        let quad = GeneratorQuadrature::default();
        let f = |x: f64| (-x * x).exp();
        let mut worst: f64 = 0.0;
        for (c, w) in [(0.0, 1.0), (0.5, 0.5), (-0.7, 2.0)] {
            let g = move |x: f64| (-(x - c) * (x - c) / w).exp();
            let fg = move |x: f64| f(x) * g(x);
            for x in [-0.5, 0.0, 0.6] {
                let afg = frac_laplacian_varorder(&fg, x, &field, &quad)?;
                let af = frac_laplacian_varorder(&f, x, &field, &quad)?;
                let ag = frac_laplacian_varorder(&g, x, &field, &quad)?;
                let gamma = carre_du_champ(&f, &g, x, &field, &quad)?;
                let scale = afg.abs().max((f(x) * ag).abs()).max((g(x) * af).abs());
                worst = worst.max((afg - f(x) * ag - g(x) * af - gamma).abs() / scale);
            }
        }
        Ok(vec![ReportRow::new("max_scaled_residual", worst, 0.0, tol, Comparison::AtMost, Provenance::QuadratureOracle)])
    }

    fn mc_vs_parametrix(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let (n, dt, t) = (self.cfg.mc_paths, self.cfg.mc_dt, 0.1);
        let sigmas = self.cfg.tol("mc_sigmas");
        let c_bias = self.cfg.tol("mc_bias");
        let f = |x: f64| (-0.5 * x * x).exp();
        let starts = [0.0, 1.0];
        let mut table = Table::new("mc_checks_semigroup", MC_COLUMNS);
        let mut rows = Vec::new();

        let sde_alpha = 1.5;
        let sigma = |x: f64| 1.0 + 0.3 * x.sin();
        let sde_kernel = ParametrixKernel::new(Symbol::for_sde(sde_alpha, sigma, 0.7, 1.3)?, self.settings.clone())?;
        let tc_scale = ScaleField::from_fn(|x| 1.0 + 0.5 * x.cos(), 0.5, 1.5, (-20.0, 20.0))?;
        let tc_kernel = ParametrixKernel::new(Symbol::with_scale(self.field.clone(), tc_scale.clone()), self.settings.clone())?;

        for (regime, kernel, alpha_high) in [("sde", &sde_kernel, sde_alpha), ("time_change", &tc_kernel, self.field.alpha_high)] {
            let prop = kernel.propagate_fn(&f);
            let pt = kernel.semigroup_values(&prop, t)?;
            let allowance = c_bias * dt.powf(1.0 / alpha_high);
            for (i, &x0) in starts.iter().enumerate() {
                let seed = self.cfg.seed.wrapping_add(12_000 + i as u64);
                let ens = match regime {
                    "sde" => simulate_sde(|_| 0.0, sigma, sde_alpha, x0, t, dt, n, seed)?,
                    _ => simulate_stable_like(&self.field, Some(&tc_scale), x0, t, dt, n, seed)?,
                };
                let mc = empirical_semigroup(&ens, &f, t)?;
                let reference = pt.value(x0);
                let row = ReportRow::new(
                    format!("{regime}_x{x0}_abs_gap"),
                    (mc.value - reference).abs(),
                    0.0,
                    sigmas * mc.stderr + allowance,
                    Comparison::AtMost,
                    Provenance::Mc,
                );
                table.push([Cell::Text(format!("{regime}_x{x0}")), mc.value.into(), reference.into(), mc.stderr.into(), Cell::from(row.pass)]);
                rows.push(row);
            }
        }
        tables.push(table);
        Ok(rows)
    }

    fn dynkin(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let sigmas = self.cfg.tol("mc_sigmas");
        let allowance = self.cfg.tol("dynkin");
        let field = AlphaField::constant(1.5)?;
        let ens = simulate_levy(&field, 0.3, 0.2, self.cfg.mc_dt, self.cfg.mc_paths, self.cfg.seed.wrapping_add(13_000))?;
        let f = |x: f64| x.cos();
        let g = |x: f64| -x.cos();
        let mut table = Table::new("mc_checks_dynkin", MC_COLUMNS);
        let mut rows = Vec::new();
        for (label, rule) in [("fixed_time", StopRule::FixedTime(0.2)), ("exit_radius_1", StopRule::Exit(1.0))] {
            let r = dynkin_residual(&ens, &f, &g, rule)?;
            let row = ReportRow::new(format!("{label}_residual"), r.value.abs(), 0.0, sigmas * r.stderr + allowance, Comparison::AtMost, Provenance::Mc);
            table.push([Cell::Text(format!("dynkin_{label}")), r.value.into(), 0.0.into(), r.stderr.into(), Cell::from(row.pass)]);
            rows.push(row);
        }
        tables.push(table);
        Ok(rows)
    }

    fn smalltime(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let field = AlphaField::constant(1.5)?;
        let phi = |y: f64| {
            let s = ((y.abs() - 0.5) / 0.25).clamp(0.0, 1.0);
            s * s * (3.0 - 2.0 * s)
        };
        let settings = SmallTimeSettings {
            steps: 10,
            exit_radius: 1.0,
            support_inner: 0.5,
            support_outer: 0.75,
            seed: self.cfg.seed.wrapping_add(14_000),
        };
        let r = smalltime_levy_estimate(0.0, &phi, 1e-3, self.cfg.smalltime_paths, &field, &settings)?;
        let rel = ((r.estimate.value - r.target) / r.target).abs();
        let row = ReportRow::new("rel_gap_t0.001", rel, 0.0, self.cfg.tol("smalltime"), Comparison::AtMost, Provenance::Mc);
        let mut table = Table::new("mc_checks_smalltime", MC_COLUMNS);
        table.push([Cell::from("smalltime_t0.001"), r.estimate.value.into(), r.target.into(), r.estimate.stderr.into(), Cell::from(row.pass)]);
        tables.push(table);
        Ok(vec![row])
    }

    fn interpolation(&self, tables: &mut Vec<Table>) -> Result<Vec<ReportRow>> {
        let grid = &self.cfg.grid;
        let bound = self.cfg.tol("mixed_difference");
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_add(15_000));
        let mut table = Table::new("c15_interpolation", &["case", "kappa_or_a", "r_or_gamma", "ratio_or_constant", "pass"]);
        let mut polys = Vec::new();
        for _ in 0..20 {
            let terms = rng.random_range(1..=8usize);
            let coeffs: Vec<(f64, f64)> = (0..terms).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            polys.push(coeffs);
        }
        let trig = |c: &[(f64, f64)], x: f64| {
            c.iter().enumerate().map(|(k, (a, b))| a * ((k + 1) as f64 * x).sin() + b * ((k + 1) as f64 * x).cos()).sum::<f64>()
        };
        let mut all_hold = true;
        let mut worst_ratio: f64 = 0.0;
        for (i, c) in polys.iter().enumerate() {
            let kappa = rng.random_range(0.05..1.95);
            let r = rng.random_range(0.05..2.0);
            let f = |x: f64| trig(c, x);
            let chk = interp_bound_check(&f, grid, kappa, r);
            all_hold &= chk.holds;
            worst_ratio = worst_ratio.max(chk.worst_ratio);
            table.push([Cell::Text(format!("interp_{i}")), kappa.into(), r.into(), chk.worst_ratio.into(), Cell::from(chk.holds)]);
        }
        let mut rows = vec![
            ReportRow::flag("interp_bound_holds_all", all_hold, Provenance::Scaling),
        ];
        let gamma = 0.5;
        let cusp = |x: f64| x.abs().powf(gamma) * (2.0 * x).cos();
        let mut worst_const: f64 = 0.0;
        for a in [0.0, gamma] {
            let cases: Vec<(String, f64)> = std::iter::once(("cusp".to_string(), mixed_difference_constant(&cusp, grid, gamma, a).constant))
                .chain(polys.iter().take(5).enumerate().map(|(i, c)| {
                    let f = |x: f64| trig(c, x);
                    (format!("trig_{i}"), mixed_difference_constant(&f, grid, gamma, a).constant)
                }))
                .collect();
            for (label, constant) in cases {
                worst_const = worst_const.max(constant);
                table.push([Cell::Text(format!("mixed_{label}")), a.into(), gamma.into(), constant.into(), Cell::from(constant <= bound)]);
            }
        }
        rows.push(ReportRow::new("mixed_difference_constant_max", worst_const, bound, 0.0, Comparison::AtMost, Provenance::Scaling));
        tables.push(table);
        Ok(rows)
    }
}
