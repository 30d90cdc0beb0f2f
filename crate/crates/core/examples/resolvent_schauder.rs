//! Resolvent solutions and their pointwise Hölder regularity.
//!
//! `cargo run --release --example resolvent_schauder`

use varorder::field::{make_alpha_field, AlphaSpec};
use varorder::grid::ScalarFunction;
use varorder::parametrix::{ParametrixKernel, ParametrixSettings};
use varorder::symbol::Symbol;
use varorder::zygmund::{dyadic_h_set, local_exponent};

fn main() -> varorder::Result<()> {
    let field = make_alpha_field(&AlphaSpec::default_sine())?;
    let kernel = ParametrixKernel::new(Symbol::new(field.clone()), ParametrixSettings::coarse())?;
    let lambda = 5.0;

    let one = kernel.resolvent_apply(&|_: f64| 1.0, lambda, 0.0)?;
    println!("R_lambda 1 = {one:.6} (1/lambda = {:.6})", 1.0 / lambda);

    let probes = [-std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2];
    let steps = move |x: f64| probes.iter().map(|&c| if x > c { 1.0 } else { 0.0 }).sum::<f64>();
    let f = kernel.resolvent(&steps, lambda)?;
    println!("\nf = R_lambda h for a step function h:");
    for &x in &probes {
        let r = local_exponent(&f, x, &dyadic_h_set(0.1, 5), 2);
        println!("  x={x:>6.3}: alpha(x)={:.3} kappa_hat={:.3}", field.eval(x), r.kappa_hat);
    }

    let h = |x: f64| (-x * x).exp();
    let (f, g) = kernel.poisson_pair(&h, lambda)?;
    let fav = kernel.favard_functional(&f, &[0.1, 0.05, 0.025, 0.0125], &[-1.0, 0.0, 1.0])?;
    println!("\nPoisson pair: sup|g| on probes {:.4}, Favard functional {:.4}", [-1.0, 0.0, 1.0].iter().map(|&x| g.value(x).abs()).fold(0.0, f64::max), fav.value);
    Ok(())
}
