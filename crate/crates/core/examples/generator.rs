//! Variable-order fractional Laplacian, carré du champ and the semigroup limit.
//!
//! `cargo run --release --example generator`

use varorder::field::{make_alpha_field, AlphaField, AlphaSpec};
use varorder::generator::{carre_du_champ, extended_generator_limit_parametrix, frac_laplacian_2d, frac_laplacian_varorder, GeneratorQuadrature};
use varorder::parametrix::{ParametrixKernel, ParametrixSettings};
use varorder::symbol::Symbol;

fn main() -> varorder::Result<()> {
    let quad = GeneratorQuadrature::default();
    let cos = |x: f64| x.cos();
    for alpha in [0.6, 1.0, 1.5, 1.9] {
        let a = AlphaField::constant(alpha)?;
        println!("alpha={alpha}: A cos(0) = {:.6} (exact -1)", frac_laplacian_varorder(&cos, 0.0, &a, &quad)?);
    }

    let field = make_alpha_field(&AlphaSpec::default_sine())?;
    let bump = |x: f64| (-x * x).exp();
    let kernel = ParametrixKernel::new(Symbol::new(field.clone()), ParametrixSettings::coarse())?;
    let probes = [-1.0, 0.0, 1.0];
    let times: Vec<f64> = (0..5).map(|j| 0.04 * 0.5f64.powi(j)).collect();
    let limits = extended_generator_limit_parametrix(&kernel, &bump, &probes, &times, 1e-3)?;
    println!("\n{:>5} {:>12} {:>12} {:>12}", "x", "Af", "(P_t f-f)/t", "Gamma(f,f)");
    for (&x, lim) in probes.iter().zip(&limits) {
        let af = frac_laplacian_varorder(&bump, x, &field, &quad)?;
        let gamma = carre_du_champ(&bump, &bump, x, &field, &quad)?;
        println!("{x:>5} {af:>12.6} {:>12.6} {gamma:>12.6}", lim.estimate);
    }

    let planar = frac_laplacian_2d(|p: [f64; 2]| (p[0] + 0.5 * p[1]).cos(), [0.0, 0.0], |_| 1.5, &quad)?;
    println!("\nd=2, alpha=1.5: A cos(xi.x)(0) = {planar:.5} (exact {:.5})", -(1.25f64).powf(0.75));
    Ok(())
}
