//! Variable-order fractional Laplacian, extended-generator limits and the carré du champ.
//!
//! In one dimension `Af(x) = c_{α(x)} ∫₀^∞ (f(x+r) + f(x−r) − 2f(x)) r^{−1−α(x)} dr`,
//! where `c_α` normalizes the Lévy measure to the symbol `|ξ|^α`. The integral is split
//! into a Taylor part on `(0, δ)`, Gauss–Legendre panels on `[δ, R]` and an explicit
//! tail beyond `R`.

use crate::error::{Error, Result};
use crate::field::AlphaField;
use crate::grid::ScalarFunction;
use crate::parametrix::ParametrixKernel;
use crate::quad::{gl16, GaussLegendre};
use crate::stable::levy_constant_closed_form;
use std::f64::consts::PI;

/// Quadrature settings for the singular Lévy integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorQuadrature {
    /// Radius of the Taylor ball.
    pub inner_radius: f64,
    /// Truncation radius of the integral.
    pub outer_cutoff: f64,
    /// Panel width beyond `r = 1`.
    pub panel_width: f64,
    /// Geometric ratio of the panels between `δ` and 1.
    pub grading: f64,
    /// Step of the centred differences for derivatives at `x`.
    pub derivative_step: f64,
    /// Angular nodes for `d = 2`.
    pub angular_nodes: usize,
}

impl Default for GeneratorQuadrature {
    fn default() -> Self {
        Self {
            inner_radius: 1e-2,
            outer_cutoff: 200.0,
            panel_width: 0.5,
            grading: 2.0,
            derivative_step: 1e-3,
            angular_nodes: 64,
        }
    }
}

impl GeneratorQuadrature {
    /// Settings for functions sampled with the given spacing.
    pub fn for_spacing(spacing: f64) -> Self {
        Self { inner_radius: 4.0 * spacing, derivative_step: spacing, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0 && self.inner_radius < 1.0 && self.outer_cutoff > 1.0) {
            return Err(Error::Param("need 0 < inner radius < 1 < outer cutoff".into()));
        }
        if !(self.panel_width > 0.0 && self.grading > 1.0 && self.derivative_step > 0.0) || self.angular_nodes < 4 {
            return Err(Error::Param("invalid generator quadrature settings".into()));
        }
        Ok(())
    }

    /// Panel breaks on `[δ, r_max]`.
    fn breaks(&self, r_max: f64) -> Vec<f64> {
        let mut b = vec![self.inner_radius];
        let mut r = self.inner_radius;
        while r * self.grading < 1.0f64.min(r_max) {
            r *= self.grading;
            b.push(r);
        }
        let mut r = *b.last().expect("nonempty");
        while r < r_max {
            r = (r + self.panel_width).min(r_max);
            b.push(r);
        }
        b.dedup();
        b
    }
}

/// Breakdown of one generator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorEval {
    pub value: f64,
    /// Taylor contribution of the ball `|y| < δ`.
    pub inner: f64,
    /// Bound on the tail beyond the truncation radius, where `f` is replaced by its mean over `[R/2, R]`.
    pub tail_bound: f64,
}

fn order_at(alpha: &AlphaField, x: f64) -> Result<f64> {
    alpha.try_eval(x)
}

fn check_stencil(f: &dyn ScalarFunction, x: f64, h: f64) -> Result<()> {
    let (lo, hi) = f.domain();
    if x - 2.0 * h < lo || x + 2.0 * h > hi {
        return Err(Error::Domain { x, h });
    }
    Ok(())
}

/// `f'` and `f''` at `x` by fourth-order centred differences.
fn derivatives(f: &dyn ScalarFunction, x: f64, h: f64) -> Result<(f64, f64)> {
    check_stencil(f, x, h)?;
    let (m2, m1, c, p1, p2) = (f.value(x - 2.0 * h), f.value(x - h), f.value(x), f.value(x + h), f.value(x + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    Ok((d1, d2))
}

/// `∫_δ^R g(r) r^{−1−α} dr` on graded panels.
fn radial(rule: &GaussLegendre, breaks: &[f64], alpha: f64, g: impl Fn(f64) -> f64) -> f64 {
    breaks.windows(2).map(|w| rule.integrate(w[0], w[1], |r| g(r) * r.powf(-1.0 - alpha))).sum()
}

/// Mean of `g` over `[R/2, R]`, standing in for `g` beyond `R`.
fn far_mean(g: impl Fn(f64) -> f64, reach: f64) -> f64 {
    let panels = (0.5 * reach).ceil().max(1.0) as usize;
    let h = 0.5 * reach / panels as f64;
    let rule = gl16();
    (0..panels).map(|k| rule.integrate(0.5 * reach + k as f64 * h, 0.5 * reach + (k + 1) as f64 * h, &g)).sum::<f64>() / (0.5 * reach)
}

/// One side of the 1-D integral, truncated at the domain edge or the cutoff.
struct Side {
    reach: f64,
}

fn sides(f: &dyn ScalarFunction, x: f64, quad: &GeneratorQuadrature) -> [Side; 2] {
    let (lo, hi) = f.domain();
    [Side { reach: (hi - x).min(quad.outer_cutoff) }, Side { reach: (x - lo).min(quad.outer_cutoff) }]
}

/// `Af(x)` with its Taylor part and tail bound, `d = 1`.
pub fn generator_eval(f: &dyn ScalarFunction, x: f64, alpha: &AlphaField, quad: &GeneratorQuadrature) -> Result<GeneratorEval> {
    quad.validate()?;
    let a = order_at(alpha, x)?;
    let c = levy_constant_closed_form(a, 1);
    let delta = quad.inner_radius;
    let (_, d2) = derivatives(f, x, quad.derivative_step)?;
    let inner = c * d2 * delta.powf(2.0 - a) / (2.0 - a);
    let fx = f.value(x);
    let sup = sup_estimate(f, x, quad);
    let rule = gl16();
    let mut body = 0.0;
    let mut tail_bound = 0.0;
    for (side, sign) in sides(f, x, quad).iter().zip([1.0, -1.0]) {
        if side.reach <= delta {
            return Err(Error::Domain { x, h: delta });
        }
        let breaks = quad.breaks(side.reach);
        body += radial(rule, &breaks, a, |r| f.value(x + sign * r) - fx);
        let tail = side.reach.powf(-a) / a;
        let far = far_mean(|r| f.value(x + sign * r), side.reach);
        body += (far - fx) * tail;
        tail_bound += c * sup * tail;
    }
    Ok(GeneratorEval { value: inner + c * body, inner, tail_bound })
}

/// Variable-order fractional Laplacian `Af(x)` in one dimension.
pub fn frac_laplacian_varorder(f: &dyn ScalarFunction, x: f64, alpha: &AlphaField, quad: &GeneratorQuadrature) -> Result<f64> {
    Ok(generator_eval(f, x, alpha, quad)?.value)
}

fn sup_estimate(f: &dyn ScalarFunction, x: f64, quad: &GeneratorQuadrature) -> f64 {
    let [right, left] = sides(f, x, quad);
    let (lo, hi) = (x - left.reach, x + right.reach);
    (0..=400).map(|k| f.value(lo + (hi - lo) * k as f64 / 400.0).abs()).fold(0.0, f64::max)
}

/// Variable-order fractional Laplacian in two dimensions, with `α` depending on `x`.
pub fn frac_laplacian_2d<F>(f: F, x: [f64; 2], alpha: impl Fn([f64; 2]) -> f64, quad: &GeneratorQuadrature) -> Result<f64>
where
    F: Fn([f64; 2]) -> f64,
{
    quad.validate()?;
    let a = alpha(x);
    if !(a > 0.0 && a < 2.0) {
        return Err(Error::Range { value: a, at: x[0] });
    }
    let c = levy_constant_closed_form(a, 2);
    let h = quad.derivative_step;
    let fx = f(x);
    let lap = (f([x[0] + h, x[1]]) + f([x[0] - h, x[1]]) + f([x[0], x[1] + h]) + f([x[0], x[1] - h]) - 4.0 * fx) / (h * h);
    let delta = quad.inner_radius;
    // ∫_{|y|<δ} y_i y_j |y|^{−2−α} dy = δ_ij π δ^{2−α}/(2−α)
    let inner = c * 0.5 * lap * PI * delta.powf(2.0 - a) / (2.0 - a);
    let m = quad.angular_nodes;
    let dirs: Vec<[f64; 2]> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).map(|t| [t.cos(), t.sin()]).collect();
    let breaks = quad.breaks(quad.outer_cutoff);
    let body = radial(gl16(), &breaks, a, |r| {
        let mean = dirs.iter().map(|d| f([x[0] + r * d[0], x[1] + r * d[1]])).sum::<f64>() / m as f64;
        2.0 * PI * (mean - fx)
    });
    let far = far_mean(
        |r| dirs.iter().map(|d| f([x[0] + r * d[0], x[1] + r * d[1]])).sum::<f64>() / m as f64,
        quad.outer_cutoff,
    );
    let tail = 2.0 * PI * (far - fx) * quad.outer_cutoff.powf(-a) / a;
    Ok(inner + c * (body + tail))
}

/// `Γ(f, g)(x) = c_{α(x)} ∫ (f(x+y) − f(x))(g(x+y) − g(x)) |y|^{−1−α(x)} dy`.
pub fn carre_du_champ(
    f: &dyn ScalarFunction,
    g: &dyn ScalarFunction,
    x: f64,
    alpha: &AlphaField,
    quad: &GeneratorQuadrature,
) -> Result<f64> {
    quad.validate()?;
    let a = order_at(alpha, x)?;
    let c = levy_constant_closed_form(a, 1);
    let delta = quad.inner_radius;
    let (df, _) = derivatives(f, x, quad.derivative_step)?;
    let (dg, _) = derivatives(g, x, quad.derivative_step)?;
    let inner = 2.0 * df * dg * delta.powf(2.0 - a) / (2.0 - a);
    let (fx, gx) = (f.value(x), g.value(x));
    let (fs, gs) = (sides(f, x, quad), sides(g, x, quad));
    let mut body = 0.0;
    for k in 0..2 {
        let reach = fs[k].reach.min(gs[k].reach);
        if reach <= delta {
            return Err(Error::Domain { x, h: delta });
        }
        let sign = if k == 0 { 1.0 } else { -1.0 };
        let breaks = quad.breaks(reach);
        body += radial(gl16(), &breaks, a, |r| (f.value(x + sign * r) - fx) * (g.value(x + sign * r) - gx));
        let far_f = far_mean(|r| f.value(x + sign * r), reach);
        let far_g = far_mean(|r| g.value(x + sign * r), reach);
        body += (far_f - fx) * (far_g - gx) * reach.powf(-a) / a;
    }
    Ok(c * (inner + body))
}

/// Richardson-extrapolated small-time limit of `(P_t f(x) − f(x))/t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub estimate: f64,
    /// `(t, (P_t f(x) − f(x))/t)` in the order of the input sequence.
    pub quotients: Vec<(f64, f64)>,
    /// Last entry of each row of the extrapolation table.
    pub extrapolants: Vec<f64>,
    /// Successive extrapolants differ by more than `10·tol`.
    pub non_convergence: bool,
}

/// Small-time limit from a semigroup evaluator `t ↦ P_t f(x)`.
///
/// `t_seq` must be decreasing and geometric with at least four entries. The quotients are
/// extrapolated in integer powers of `t`; `tol` is relative to `max(1, |estimate|)`.
pub fn extended_generator_limit(
    mut semigroup: impl FnMut(f64) -> Result<f64>,
    f_x: f64,
    t_seq: &[f64],
    tol: f64,
) -> Result<LimitReport> {
    if t_seq.len() < 4 {
        return Err(Error::Param("need at least four times".into()));
    }
    let ratio = t_seq[1] / t_seq[0];
    let geometric = t_seq.windows(2).all(|w| ((w[1] / w[0]) - ratio).abs() < 1e-9 * ratio);
    if !(ratio > 0.0 && ratio < 1.0 && geometric) {
        return Err(Error::Param("times must decrease geometrically".into()));
    }
    let mut quotients = Vec::with_capacity(t_seq.len());
    for &t in t_seq {
        quotients.push((t, (semigroup(t)? - f_x) / t));
    }
    let mut prev: Vec<f64> = Vec::new();
    let mut extrapolants = Vec::with_capacity(t_seq.len());
    for &(_, q) in &quotients {
        let mut row = vec![q];
        for (j, p) in prev.iter().enumerate() {
            let w = ratio.powi(j as i32 + 1);
            let next = (row[j] - w * p) / (1.0 - w);
            row.push(next);
        }
        extrapolants.push(*row.last().expect("nonempty"));
        prev = row;
    }
    let estimate = *extrapolants.last().expect("nonempty");
    let scale = estimate.abs().max(1.0);
    let n = extrapolants.len();
    let non_convergence = (extrapolants[n - 1] - extrapolants[n - 2]).abs() > 10.0 * tol * scale;
    Ok(LimitReport { estimate, quotients, extrapolants, non_convergence })
}

/// [`extended_generator_limit`] for the parametrix semigroup at several points.
pub fn extended_generator_limit_parametrix(
    kernel: &ParametrixKernel,
    f: &dyn ScalarFunction,
    points: &[f64],
    t_seq: &[f64],
    tol: f64,
) -> Result<Vec<LimitReport>> {
    let prop = kernel.propagate_fn(f);
    let mut values = Vec::with_capacity(t_seq.len());
    for &t in t_seq {
        values.push(kernel.semigroup_values(&prop, t)?);
    }
    points
        .iter()
        .map(|&x| {
            let mut k = 0;
            extended_generator_limit(
                |_| {
                    let v = values[k].value(x);
                    k += 1;
                    Ok(v)
                },
                f.value(x),
                t_seq,
                tol,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> GeneratorQuadrature {
        GeneratorQuadrature::default()
    }

    #[test]
    fn constants_are_harmonic() {
        let a = AlphaField::constant(1.3).unwrap();
        let v = frac_laplacian_varorder(&|_: f64| 2.0, 0.4, &a, &quad()).unwrap();
        assert!(v.abs() < 1e-12);
        let g = carre_du_champ(&|_: f64| 2.0, &|x: f64| x.sin(), 0.4, &a, &quad()).unwrap();
        assert!(g.abs() < 1e-12);
    }

    #[test]
    fn cosine_is_an_eigenfunction() {
        let a = AlphaField::constant(1.5).unwrap();
        let v = frac_laplacian_varorder(&|x: f64| x.cos(), 0.0, &a, &quad()).unwrap();
        assert!((v + 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn richardson_removes_polynomial_bias() {
        let ts: Vec<f64> = (0..5).map(|k| 0.1 * 0.5f64.powi(k)).collect();
        let r = extended_generator_limit(|t| Ok(1.0 - 2.0 * t + 3.0 * t * t - t * t * t), 1.0, &ts, 1e-6).unwrap();
        assert!((r.estimate + 2.0).abs() < 1e-10);
        assert!(!r.non_convergence);
    }

    #[test]
    fn limit_requires_geometric_sequences() {
        let e = extended_generator_limit(|_| Ok(0.0), 0.0, &[0.1, 0.05, 0.02, 0.01], 1e-3);
        assert!(matches!(e, Err(Error::Param(_))));
        let e = extended_generator_limit(|_| Ok(0.0), 0.0, &[0.1, 0.05, 0.025], 1e-3);
        assert!(matches!(e, Err(Error::Param(_))));
    }

    #[test]
    fn stencil_outside_domain_is_reported() {
        let grid = crate::grid::Grid::line(-1.0, 1.0, 201).unwrap();
        let gf = crate::grid::sample_line(|x| x * x, &grid).unwrap();
        let a = AlphaField::constant(1.0).unwrap();
        let e = frac_laplacian_varorder(&gf, 1.0, &a, &GeneratorQuadrature::for_spacing(0.01));
        assert!(matches!(e, Err(Error::Domain { .. })));
    }
}
