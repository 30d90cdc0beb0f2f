//! Path simulation, empirical semigroup, exit times and the Dynkin identity.
//!
//! `cargo run --release --example monte_carlo`

use varorder::field::{make_alpha_field, AlphaField, AlphaSpec};
use varorder::grid::ScalarFunction;
use varorder::montecarlo::{dynkin_residual, empirical_semigroup, exit_time, simulate_levy, StopRule};
use varorder::parametrix::{ParametrixKernel, ParametrixSettings};
use varorder::symbol::Symbol;

fn main() -> varorder::Result<()> {
    let field = make_alpha_field(&AlphaSpec::default_sine())?;
    let (t, dt, n, seed) = (0.1, 1e-3, 50_000, 7);
    let f = |x: f64| (-0.5 * x * x).exp();

    let ens = simulate_levy(&field, 0.0, t, dt, n, seed)?;
    let mc = empirical_semigroup(&ens, &f, t)?;
    let kernel = ParametrixKernel::new(Symbol::new(field.clone()), ParametrixSettings::coarse())?;
    let pt = kernel.semigroup_values(&kernel.propagate_fn(&f), t)?;
    println!("P_t f(0): Monte Carlo {:.5} ± {:.5}, parametrix {:.5}", mc.value, mc.stderr, pt.value(0.0));

    let long = simulate_levy(&field, 0.0, 2.0, 1e-2, 20_000, seed)?;
    let exits = exit_time(&long, 0.0, 1.0)?;
    let mut taus: Vec<f64> = exits.records.iter().map(|r| r.tau).collect();
    taus.sort_by(f64::total_cmp);
    println!("exit from (-1, 1): median {:.4}, censored fraction {:.4}", taus[taus.len() / 2], exits.censored_fraction);

    let constant = AlphaField::constant(1.5)?;
    let ens = simulate_levy(&constant, 0.3, 0.2, dt, n, seed + 1)?;
    let g = |x: f64| -x.cos();
    for rule in [StopRule::FixedTime(0.2), StopRule::Exit(1.0)] {
        let r = dynkin_residual(&ens, &|x: f64| x.cos(), &g, rule)?;
        println!("Dynkin residual {rule:?}: {:.5} ± {:.5}", r.value, r.stderr);
    }
    Ok(())
}
