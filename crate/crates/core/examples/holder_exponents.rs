//! Variable-order Hölder–Zygmund norms and local exponent estimates.
//!
//! `cargo run --release --example holder_exponents`

use varorder::field::{make_alpha_field, validate_alpha, AlphaSpec};
use varorder::grid::Grid;
use varorder::zygmund::{default_h_set, interp_bound_check, local_exponent, mixed_difference_constant, zygmund_norm};

fn main() -> varorder::Result<()> {
    let field = make_alpha_field(&AlphaSpec::default_sine())?;
    let report = validate_alpha(&field);
    println!("order field: [{:.2}, {:.2}], admissible = {}", report.alpha_low, report.alpha_high, report.pass);

    println!("\nlocal exponents of |x - c|^0.7 and |x - c|^1.4 at c:");
    for beta in [0.7, 1.4] {
        let f = move |x: f64| (x - 0.3).abs().powf(beta);
        let r = local_exponent(&f, 0.3, &default_h_set(), 2);
        println!("  beta={beta}: kappa_hat={:.4} r2={:.4} flag={}", r.kappa_hat, r.r2, r.flag.as_str());
    }

    let grid = Grid::line(-2.0, 2.0, 401)?;
    let f = |x: f64| x.abs().powf(0.5) * (2.0 * x).cos();
    let norm = zygmund_norm(&f, |_| 0.5, (-1.0, 1.0), &grid)?;
    println!("\nC^0.5 norm of |x|^0.5 cos 2x on [-1,1]: {:.4} (sup {:.4}, seminorm {:.4})", norm.total(), norm.sup_part, norm.seminorm_part);
    let variable = zygmund_norm(&f, |x| field.eval(x) - 1.0, (-1.0, 1.0), &grid)?;
    println!("variable-order (alpha(x) - 1) seminorm: {:.4}", variable.seminorm_part);

    let chk = interp_bound_check(&f64::sin, &grid, 1.0, 0.5);
    println!("\ninterpolation bound for sin: holds={} worst ratio {:.4}", chk.holds, chk.worst_ratio);
    for a in [0.0, 0.5] {
        println!("mixed-difference constant (gamma=0.5, a={a}): {:.4}", mixed_difference_constant(&f, &grid, 0.5, a).constant);
    }
    Ok(())
}
