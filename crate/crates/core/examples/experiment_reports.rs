//! Configuration parsing and CSV reports for one experiment.
//!
//! `cargo run --release --example experiment_reports`

use varorder::config::ExperimentConfig;
use varorder::experiment::{run_experiment, Experiment};

fn main() -> varorder::Result<()> {
    let text = "alpha.kind = constant\nalpha.params = 1\ngrid.lo = -5\ngrid.hi = 5\ngrid.n = 101\ntime.points = 0.1, 1\n";
    let mut cfg = ExperimentConfig::parse(text)?;
    cfg.out_dir = std::env::temp_dir().join("varorder-example");
    let report = run_experiment(&cfg, Experiment::Density, |_| {})?;
    for row in &report.rows {
        println!("{:<40} {:>12.3e} tol {:>8.1e} {}", row.quantity, row.value, row.tolerance, if row.pass { "pass" } else { "FAIL" });
    }
    for path in report.write(&cfg.out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
