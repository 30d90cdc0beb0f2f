//! Isotropic α-stable densities, their derivatives, the two-sided bound and
//! the Lévy-measure normalizing constant.
//!
//! All integrals are radial Fourier integrals evaluated with composite
//! Gauss–Legendre panels: geometrically graded toward the origin, then of
//! width at most a quarter period of the oscillator up to a cutoff `R` with
//! `exp(-t R^ρ)` below the tail tolerance.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{gl16, GaussLegendre};

/// Quadrature controls for the radial integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Bound on `exp(-t R^ρ)` at the cutoff.
    pub tail_tol: f64,
    /// Largest admissible phase `|x|·R`.
    pub max_phase: f64,
    /// Geometric refinement levels toward ξ = 0 (ratio 1/4).
    pub origin_levels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { tail_tol: 1e-16, max_phase: 2e7, origin_levels: 24 }
    }
}

/// Parameters of `p^ρ(t, ·)` in dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableDensityParams {
    pub rho: f64,
    pub t: f64,
    pub dim: usize,
    pub quad: QuadSettings,
}

impl StableDensityParams {
    pub fn new(rho: f64, t: f64, dim: usize) -> Result<Self> {
        if !(rho > 0.0 && rho <= 2.0) {
            return Err(Error::Param(format!("stability index {rho} not in (0,2]")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Param(format!("time {t} must be positive")));
        }
        if !(dim == 1 || dim == 2) {
            return Err(Error::Param(format!("dimension {dim} not in {{1,2}}")));
        }
        Ok(Self { rho, t, dim, quad: QuadSettings::default() })
    }

    /// Cutoff radius with `exp(-t R^ρ) = tail_tol`.
    pub fn cutoff(&self) -> f64 {
        ((-self.quad.tail_tol.ln()) / self.t).powf(1.0 / self.rho)
    }
}

/// Oscillatory factor of a radial integrand.
#[derive(Debug, Clone, Copy)]
enum Oscillator {
    Cos,
    Sin,
    J0,
    /// `J1(rξ)/(rξ)`, regular at 0.
    J1Over,
    /// `J1'(rξ) = J0(rξ) − J1(rξ)/(rξ)`.
    J1Prime,
}

impl Oscillator {
    #[inline]
    fn eval(self, z: f64) -> f64 {
        match self {
            Oscillator::Cos => z.cos(),
            Oscillator::Sin => z.sin(),
            Oscillator::J0 => libm::j0(z),
            Oscillator::J1Over => j1_over(z),
            Oscillator::J1Prime => libm::j0(z) - j1_over(z),
        }
    }
}

#[inline]
fn j1_over(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        0.5 - z * z / 16.0
    } else {
        libm::j1(z) / z
    }
}

/// `∫₀^R osc(r ξ) w(ξ) dξ` with panels adapted to the phase `r`.
fn radial<W: Fn(f64) -> f64>(p: &StableDensityParams, r: f64, osc: Oscillator, w: W) -> Result<f64> {
    radial_with(gl16(), p.cutoff(), &p.quad, r, osc, w)
}

fn radial_with<W: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    cutoff: f64,
    quad: &QuadSettings,
    r: f64,
    osc: Oscillator,
    w: W,
) -> Result<f64> {
    let r = r.abs();
    if r * cutoff > quad.max_phase {
        return Err(Error::Quadrature(format!(
            "phase budget exceeded: |x|·R = {:.3e}",
            r * cutoff
        )));
    }
    let width = if r > 0.0 { (0.5 * PI / r).min(cutoff / 32.0) } else { cutoff / 32.0 };
    let f = |xi: f64| osc.eval(r * xi) * w(xi);
    let mut total = 0.0;
    let mut a = width * 0.25f64.powi(quad.origin_levels as i32);
    for _ in 0..quad.origin_levels {
        total += rule.integrate(a, 4.0 * a, f);
        a *= 4.0;
    }
    let panels = ((cutoff - width) / width).ceil().max(1.0) as usize;
    let step = (cutoff - width) / panels as f64;
    for k in 0..panels {
        let lo = width + k as f64 * step;
        total += rule.integrate(lo, lo + step, f);
    }
    Ok(total)
}

/// `∫₀^R cos(r ξ) w(ξ) dξ` where `w` carries the damping `exp(−rate·ξ^ρ)`;
/// the cutoff `R` is set from that damping.
pub fn damped_cosine_transform<W: Fn(f64) -> f64>(rate: f64, rho: f64, r: f64, w: W) -> Result<f64> {
    let quad = QuadSettings::default();
    let cutoff = ((-quad.tail_tol.ln() + 10.0) / rate).powf(1.0 / rho);
    radial_with(gl16(), cutoff, &quad, r, Oscillator::Cos, w)
}

/// Closed form `α 2^{α−1} Γ((α+d)/2) / (π^{d/2} Γ(1−α/2))` of [`levy_constant`].
pub fn levy_constant_closed_form(alpha: f64, dim: usize) -> f64 {
    let d = dim as f64;
    alpha * 2f64.powf(alpha - 1.0) * libm::tgamma((alpha + d) / 2.0)
        / (PI.powf(d / 2.0) * libm::tgamma(1.0 - alpha / 2.0))
}

fn norm(p: &StableDensityParams) -> f64 {
    if p.dim == 1 {
        1.0 / PI
    } else {
        1.0 / (2.0 * PI)
    }
}

fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `p^ρ(t, x)`, the density with Fourier transform `exp(-t|ξ|^ρ)`.
pub fn stable_pdf(p: &StableDensityParams, x: &[f64]) -> Result<f64> {
    check_point(p, x)?;
    let (t, rho) = (p.t, p.rho);
    let e = move |xi: f64| (-t * xi.powf(rho)).exp();
    let v = if p.dim == 1 {
        radial(p, x[0], Oscillator::Cos, e)?
    } else {
        radial(p, radius(x), Oscillator::J0, |xi| xi * e(xi))?
    };
    Ok(norm(p) * v)
}

/// One-dimensional convenience wrapper for [`stable_pdf`].
pub fn stable_pdf_1d(rho: f64, t: f64, x: f64) -> Result<f64> {
    stable_pdf(&StableDensityParams::new(rho, t, 1)?, &[x])
}

/// Distribution function of `p^ρ(t, ·)` in one dimension.
pub fn stable_cdf_1d(rho: f64, t: f64, x: f64) -> Result<f64> {
    let p = StableDensityParams::new(rho, t, 1)?;
    let s = radial_signed_sin(&p, x, &|xi| (-t * xi.powf(rho)).exp() / xi)?;
    Ok(0.5 + s / PI)
}

/// `∂_x^β p^ρ(t, x)` for `|β| ≤ 2`; `beta` has one entry per coordinate.
pub fn stable_pdf_deriv(p: &StableDensityParams, x: &[f64], beta: &[usize]) -> Result<f64> {
    check_point(p, x)?;
    if beta.len() != p.dim {
        return Err(Error::Param("multi-index length must equal the dimension".into()));
    }
    let order: usize = beta.iter().sum();
    if order > 2 {
        return Err(Error::Param(format!("derivative order {order} exceeds 2")));
    }
    if order == 0 {
        return stable_pdf(p, x);
    }
    let (t, rho) = (p.t, p.rho);
    let e = move |xi: f64| (-t * xi.powf(rho)).exp();
    let c = norm(p);
    if p.dim == 1 {
        let xs = x[0];
        return Ok(match order {
            1 => -c * radial_signed_sin(p, xs, &|xi| xi * e(xi))?,
            _ => -c * radial(p, xs, Oscillator::Cos, |xi| xi * xi * e(xi))?,
        });
    }
    let r = radius(x);
    // p(x) = f(|x|); f'(r)/r = −c∫ξ³ J1(rξ)/(rξ) E, f''(r) = −c∫ξ³ J1'(rξ) E.
    let f1_over_r = -c * radial(p, r, Oscillator::J1Over, |xi| xi.powi(3) * e(xi))?;
    if order == 1 {
        let i = beta.iter().position(|&b| b == 1).unwrap_or(0);
        return Ok(f1_over_r * x[i]);
    }
    let (i, j) = match (beta[0], beta[1]) {
        (2, 0) => (0, 0),
        (0, 2) => (1, 1),
        _ => (0, 1),
    };
    let delta = if i == j { 1.0 } else { 0.0 };
    if r < 1e-14 {
        return Ok(f1_over_r * delta);
    }
    let f2 = -c * radial(p, r, Oscillator::J1Prime, |xi| xi.powi(3) * e(xi))?;
    let (xi_, xj) = (x[i] / r, x[j] / r);
    Ok(f2 * xi_ * xj + f1_over_r * (delta - xi_ * xj))
}

fn radial_signed_sin(p: &StableDensityParams, x: f64, w: &dyn Fn(f64) -> f64) -> Result<f64> {
    let v = radial(p, x, Oscillator::Sin, w)?;
    Ok(if x < 0.0 { -v } else { v })
}

/// `∂_ρ p^ρ(t, x)` from the differentiated Fourier integrand.
pub fn stable_pdf_drho(p: &StableDensityParams, x: &[f64]) -> Result<f64> {
    check_point(p, x)?;
    if p.rho >= 2.0 {
        return Err(Error::Param("order derivative needs ρ < 2".into()));
    }
    let (t, rho) = (p.t, p.rho);
    let w = move |xi: f64| {
        let a = xi.powf(rho);
        (-t * a).exp() * a * xi.ln()
    };
    let v = if p.dim == 1 {
        radial(p, x[0], Oscillator::Cos, w)?
    } else {
        radial(p, radius(x), Oscillator::J0, |xi| xi * w(xi))?
    };
    Ok(-t * norm(p) * v)
}

/// `S(x, ρ, t) = min{t^{-d/ρ}, t/|x|^{d+ρ}}`.
pub fn stable_bound_s(x: &[f64], rho: f64, t: f64) -> f64 {
    let d = x.len() as f64;
    let r = radius(x);
    let near = t.powf(-d / rho);
    if r == 0.0 {
        near
    } else {
        near.min(t / r.powf(d + rho))
    }
}

fn check_point(p: &StableDensityParams, x: &[f64]) -> Result<()> {
    if x.len() != p.dim {
        return Err(Error::Param(format!("point has {} coordinates, expected {}", x.len(), p.dim)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Param("non-finite position".into()));
    }
    Ok(())
}

/// `h(α) = ∫(1 − cos y₁)|y|^{-d-α} dy` by a quadrature split at |y| = 1.
pub fn levy_integral(alpha: f64, dim: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Param(format!("α = {alpha} not in (0,2)")));
    }
    let rule = gl16();
    let a = alpha;
    // one minus the angular average of cos(r cos θ): 1 − cos r or 1 − J0(r)
    let one_minus = |r: f64| -> f64 {
        if dim == 1 {
            2.0 * (0.5 * r).sin().powi(2)
        } else if r < 1e-3 {
            let r2 = r * r;
            r2 / 4.0 - r2 * r2 / 64.0
        } else {
            1.0 - libm::j0(r)
        }
    };
    let eps = 4f64.powi(-30);
    let lead = if dim == 1 { 0.5 } else { 0.25 };
    let mut inner = lead * eps.powf(2.0 - a) / (2.0 - a);
    let mut lo = eps;
    while lo < 1.0 {
        let hi = (4.0 * lo).min(1.0);
        inner += rule.integrate(lo, hi, |r| one_minus(r) * r.powf(-1.0 - a));
        lo = hi;
    }
    // outer: ∫₁^∞ r^{-1-α} dr = 1/α minus the oscillatory part up to Y, plus its asymptotic tail
    let y_end = 4000.0 * PI;
    let osc = |r: f64| if dim == 1 { r.cos() } else { libm::j0(r) };
    let mut oscillating = 0.0;
    let width = 0.5 * PI;
    let mut lo = 1.0;
    while lo < y_end {
        let hi = (lo + width).min(y_end);
        oscillating += rule.integrate(lo, hi, |r| osc(r) * r.powf(-1.0 - a));
        lo = hi;
    }
    let tail = if dim == 1 {
        let e = 1.0 + a;
        -y_end.sin() * y_end.powf(-e) + e * y_end.cos() * y_end.powf(-e - 1.0)
    } else {
        let e = 1.5 + a;
        (2.0 / PI).sqrt() * (-(y_end - 0.25 * PI).sin()) * y_end.powf(-e)
    };
    let radial_total = inner + 1.0 / a - oscillating - tail;
    let h = if dim == 1 { 2.0 * radial_total } else { 2.0 * PI * radial_total };
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Quadrature(format!("h(α) = {h} not positive")));
    }
    Ok(h)
}

/// `c_{d,α} = 1/h(α)`, the constant making `c∫(1−cos(y·ξ))|y|^{-d-α}dy = |ξ|^α`.
pub fn levy_constant(alpha: f64, dim: usize) -> Result<f64> {
    levy_integral(alpha, dim).map(|h| 1.0 / h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(rho: f64, t: f64) -> StableDensityParams {
        StableDensityParams::new(rho, t, 1).unwrap()
    }

    #[test]
    fn gaussian_and_cauchy_at_origin() {
        assert!((stable_pdf(&p1(2.0, 1.0), &[0.0]).unwrap() - (4.0 * PI).powf(-0.5)).abs() < 1e-12);
        assert!((stable_pdf(&p1(1.0, 1.0), &[0.0]).unwrap() - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn origin_value_matches_gamma_formula() {
        let rho: f64 = 1.5;
        let expect = libm::tgamma(1.0 + 1.0 / rho) / PI;
        assert!((stable_pdf(&p1(rho, 1.0), &[0.0]).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.2873).abs() < 1e-4);
    }

    #[test]
    fn cauchy_derivative() {
        let v = stable_pdf_deriv(&p1(1.0, 1.0), &[1.0], &[1]).unwrap();
        assert!((v + 1.0 / (2.0 * PI)).abs() < 1e-10);
        assert!(stable_pdf_deriv(&p1(2.0, 1.0), &[0.0], &[1]).unwrap().abs() < 1e-14);
        let v = stable_pdf_deriv(&p1(1.0, 1.0), &[-1.0], &[1]).unwrap();
        assert!((v - 1.0 / (2.0 * PI)).abs() < 1e-10);
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        let p = p1(1.5, 1.0);
        for &x in &[0.0, 0.7, 2.5] {
            let e = 1e-3;
            let fd = (stable_pdf(&p, &[x + e]).unwrap() - 2.0 * stable_pdf(&p, &[x]).unwrap()
                + stable_pdf(&p, &[x - e]).unwrap())
                / (e * e);
            let v = stable_pdf_deriv(&p, &[x], &[2]).unwrap();
            assert!((v - fd).abs() < 1e-4 * v.abs().max(1e-2), "x={x}: {v} vs {fd}");
        }
        // at the origin: −(1/π)∫ξ² e^{−ξ^ρ} = −Γ(3/ρ)/(ρπ)
        let expect = -libm::tgamma(3.0 / 1.5) / (1.5 * PI);
        assert!((stable_pdf_deriv(&p, &[0.0], &[2]).unwrap() - expect).abs() < 1e-11);
    }

    #[test]
    fn drho_at_origin_cauchy() {
        let v = stable_pdf_drho(&p1(1.0, 1.0), &[0.0]).unwrap();
        let euler_gamma = 0.577_215_664_901_532_9;
        assert!((v + (1.0 - euler_gamma) / PI).abs() < 1e-10);
    }

    #[test]
    fn drho_matches_central_difference_and_is_even() {
        for &x in &[0.3, 1.7] {
            let eps = 1e-4;
            let fd = (stable_pdf(&p1(1.3 + eps, 0.5), &[x]).unwrap()
                - stable_pdf(&p1(1.3 - eps, 0.5), &[x]).unwrap())
                / (2.0 * eps);
            let v = stable_pdf_drho(&p1(1.3, 0.5), &[x]).unwrap();
            let w = stable_pdf_drho(&p1(1.3, 0.5), &[-x]).unwrap();
            assert!((v - fd).abs() < 1e-3 * v.abs(), "{v} vs {fd}");
            assert!((v - w).abs() < 1e-15);
        }
    }

    #[test]
    fn bound_s() {
        assert_eq!(stable_bound_s(&[0.0], 1.5, 0.3), 0.3f64.powf(-1.0 / 1.5));
        assert_eq!(stable_bound_s(&[2.0], 1.0, 1.0), 0.25);
        // branches meet at |x| = t^{1/ρ}
        let (t, rho) = (0.2f64, 1.3f64);
        let r = t.powf(1.0 / rho);
        let a = t.powf(-1.0 / rho);
        let b = t / r.powf(1.0 + rho);
        assert!((a - b).abs() < 1e-12 * a);
        let s1 = stable_bound_s(&[r * (1.0 - 1e-9)], rho, t);
        let s2 = stable_bound_s(&[r * (1.0 + 1e-9)], rho, t);
        assert!((s1 - s2).abs() < 1e-7 * s1);
    }

    #[test]
    fn levy_constant_values() {
        assert!((levy_constant(1.0, 1).unwrap() - 1.0 / PI).abs() < 1e-8);
        let closed = |a: f64, d: f64| {
            a * 2f64.powf(a - 1.0) * libm::tgamma((a + d) / 2.0)
                / (PI.powf(d / 2.0) * libm::tgamma(1.0 - a / 2.0))
        };
        for &a in &[0.6, 1.5, 1.9] {
            for d in [1usize, 2] {
                let c = levy_constant(a, d).unwrap();
                let e = closed(a, d as f64);
                assert!((c - e).abs() < 1e-7 * e, "α={a} d={d}: {c} vs {e}");
            }
        }
        assert!((levy_constant(1.5, 1).unwrap() - 0.2992).abs() < 1e-4);
    }

    #[test]
    fn two_dimensional_density() {
        let p = StableDensityParams::new(2.0, 0.5, 2).unwrap();
        let x = [0.4, -0.3];
        let expect = (-(0.25) / 2.0f64).exp() / (4.0 * PI * 0.5);
        assert!((stable_pdf(&p, &x).unwrap() - expect).abs() < 1e-10);
        // Laplacian of the Gaussian density: (|x|²/(4t²) − d/(2t))·p
        let lap = stable_pdf_deriv(&p, &x, &[2, 0]).unwrap() + stable_pdf_deriv(&p, &x, &[0, 2]).unwrap();
        let expect_lap = (0.25 / (4.0 * 0.25) - 1.0 / 0.5) * expect;
        assert!((lap - expect_lap).abs() < 1e-9);
        let dx = stable_pdf_deriv(&p, &x, &[1, 0]).unwrap();
        assert!((dx - (-0.4 / (2.0 * 0.5)) * expect).abs() < 1e-10);
        let mixed = stable_pdf_deriv(&p, &x, &[1, 1]).unwrap();
        assert!((mixed - (0.4 * -0.3) / (4.0 * 0.25) * expect).abs() < 1e-10);
    }

    #[test]
    fn cdf_symmetry() {
        let c = stable_cdf_1d(1.0, 1.0, 1.0).unwrap();
        assert!((c - (0.5 + 1.0f64.atan() / PI)).abs() < 1e-10);
        assert!((stable_cdf_1d(1.4, 0.3, -0.8).unwrap() + stable_cdf_1d(1.4, 0.3, 0.8).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_budget_error() {
        let p = p1(0.5, 1e-3);
        assert!(matches!(stable_pdf(&p, &[1e6]), Err(Error::Quadrature(_))));
    }
}
