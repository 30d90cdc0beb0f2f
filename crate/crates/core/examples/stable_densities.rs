//! Symmetric stable densities: values, spatial and order derivatives, and the two-sided bound.
//!
//! `cargo run --release --example stable_densities`

use varorder::stable::{levy_constant, stable_bound_s, stable_pdf, stable_pdf_deriv, stable_pdf_drho, StableDensityParams};

fn main() -> varorder::Result<()> {
    println!("{:>5} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "rho", "x", "p", "p'", "p''", "dp/drho", "p/S");
    for rho in [0.8, 1.2, 1.5, 1.9] {
        let p = StableDensityParams::new(rho, 0.5, 1)?;
        for x in [0.0, 0.5, 2.0, 8.0] {
            let v = stable_pdf(&p, &[x])?;
            println!(
                "{rho:>5} {x:>6} {v:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.4}",
                stable_pdf_deriv(&p, &[x], &[1])?,
                stable_pdf_deriv(&p, &[x], &[2])?,
                stable_pdf_drho(&p, &[x])?,
                v / stable_bound_s(&[x], rho, 0.5),
            );
        }
    }
    let planar = StableDensityParams::new(1.5, 1.0, 2)?;
    println!("\nd=2, rho=1.5, t=1: p(0) = {:.6e}, p((1,1)) = {:.6e}", stable_pdf(&planar, &[0.0, 0.0])?, stable_pdf(&planar, &[1.0, 1.0])?);
    for alpha in [0.5, 1.0, 1.5] {
        println!("Levy constant c(1, {alpha}) = {:.6}", levy_constant(alpha, 1)?);
    }
    Ok(())
}
