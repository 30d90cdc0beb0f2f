//! Runs every acceptance check at the reference configuration and prints one line per check.

use std::process::ExitCode;

use varorder::config::ExperimentConfig;
use varorder::verify::{Verifier, CRITERIA};

fn main() -> ExitCode {
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let verifier = Verifier::new(ExperimentConfig::default()).expect("reference configuration is valid");
    let mut failed = Vec::new();
    for id in 1..=CRITERIA.len() {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        match verifier.run(id) {
            Ok(c) => {
                println!("{}", c.summary());
                if !c.pass() {
                    for r in c.rows.iter().filter(|r| !r.pass) {
                        println!("    failed row {}: value={:.6e} target={:.6e} tol={:.1e}", r.quantity, r.value, r.target, r.tolerance);
                    }
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} {:<28} FAIL error: {e}", CRITERIA[id - 1]);
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed checks {failed:?}");
        ExitCode::FAILURE
    }
}
