//! Transition density of the variable-order process by the parametrix series.
//!
//! `cargo run --release --example parametrix_kernel`

use varorder::field::{make_alpha_field, AlphaSpec};
use varorder::parametrix::{ParametrixKernel, ParametrixSettings};
use varorder::symbol::Symbol;

fn main() -> varorder::Result<()> {
    let field = make_alpha_field(&AlphaSpec::default_sine())?;
    let kernel = ParametrixKernel::new(Symbol::new(field), ParametrixSettings::coarse())?;

    println!("{:>5} {:>5} {:>5} {:>12} {:>12} {:>12} {:>4} {:>10}", "t", "x", "y", "p", "p0", "corr", "it", "err");
    for t in [0.05, 0.2, 0.5] {
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (-1.5, 1.0)] {
            let e = kernel.transition_density(t, x, y)?;
            println!(
                "{t:>5} {x:>5} {y:>5} {:>12.5e} {:>12.5e} {:>12.5e} {:>4} {:>10.2e}",
                e.value, e.p0_part, e.correction_part, e.iterates_used, e.est_error
            );
        }
    }

    println!("\nmass of p(t, x, .):");
    for t in [0.05, 0.5] {
        let m = kernel.mass(t, 0.5, 20.0)?;
        println!("  t={t}: {:.6} (frozen {:.6}, tail {:.2e}, correction {:.2e})", m.total(), m.p0_mass, m.tail_mass, m.correction_mass);
    }

    let u = |x: f64| (-x * x).exp();
    let prop = kernel.propagate_fn(&u);
    println!("\nsemigroup P_t u(0) for u = exp(-x^2):");
    for t in [0.01, 0.1, 0.5, 1.0] {
        let pt = kernel.semigroup_values(&prop, t)?;
        println!("  t={t}: {:.6}", varorder::grid::ScalarFunction::value(&pt, 0.0));
    }

    let norms = kernel.phi_row_norms(&[-1.5, 0.0, 1.5]);
    println!("\nsup_x ||Phi(t, x, .)||_1 at a few lattice times:");
    for (t, n) in norms.iter().step_by(6) {
        println!("  t={t:.4}: {n:.4e}");
    }
    Ok(())
}
