//! Iterated differences, variable-order Hölder–Zygmund norms and local
//! exponent estimates.

use crate::error::{Error, Result};
use crate::field::ls_slope;
use crate::grid::{Grid, ScalarFunction};

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// `Δ_h^m f(x) = Σ_j (−1)^{m−j} C(m,j) f(x + j h)`.
pub fn iterated_difference<F: ScalarFunction + ?Sized>(f: &F, x: f64, h: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::Param("difference order must be ≥ 1".into()));
    }
    let (lo, hi) = f.domain();
    let (a, b) = if h >= 0.0 { (x, x + m as f64 * h) } else { (x + m as f64 * h, x) };
    if a < lo || b > hi {
        return Err(Error::Domain { x, h });
    }
    Ok(difference_unchecked(f, x, h, m))
}

fn difference_unchecked<F: ScalarFunction + ?Sized>(f: &F, x: f64, h: f64, m: usize) -> f64 {
    (0..=m)
        .map(|j| {
            let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(m, j) * f.value(x + j as f64 * h)
        })
        .sum()
}

/// Sampled Hölder–Zygmund norm of variable order.
#[derive(Debug, Clone, PartialEq)]
pub struct ZygmundNorm {
    pub sup_part: f64,
    pub seminorm_part: f64,
    pub diff_order: usize,
    /// Supremum of the exponent map over the sampled nodes.
    pub order_sup: f64,
    /// Position and step where the seminorm is attained.
    pub argmax: (f64, f64),
}

impl ZygmundNorm {
    pub fn total(&self) -> f64 {
        self.sup_part + self.seminorm_part
    }
}

/// Norm over the box `[u.0, u.1]` with the difference order fixed by the definition
/// (smallest integer strictly above the supremum of `order`).
pub fn zygmund_norm<F, O>(f: &F, order: O, u: (f64, f64), grid: &Grid) -> Result<ZygmundNorm>
where
    F: ScalarFunction + ?Sized,
    O: Fn(f64) -> f64,
{
    let nodes = box_nodes(grid, u);
    let sup = nodes.iter().map(|&x| order(x)).fold(f64::NEG_INFINITY, f64::max);
    let k = sup.floor() as usize + 1;
    zygmund_norm_with_order(f, order, u, grid, k)
}

/// Same as [`zygmund_norm`] with an explicit difference order `k`.
pub fn zygmund_norm_with_order<F, O>(f: &F, order: O, u: (f64, f64), grid: &Grid, k: usize) -> Result<ZygmundNorm>
where
    F: ScalarFunction + ?Sized,
    O: Fn(f64) -> f64,
{
    let nodes = box_nodes(grid, u);
    if nodes.is_empty() {
        return Err(Error::EmptyStencil("no grid node inside the box".into()));
    }
    let sup_part = nodes.iter().map(|&x| f.value(x).abs()).fold(0.0, f64::max);
    let order_sup = nodes.iter().map(|&x| order(x)).fold(f64::NEG_INFINITY, f64::max);
    let steps = dyadic_steps(grid.spacing());
    let mut best = (0.0, (f64::NAN, f64::NAN));
    let mut admissible = 0usize;
    for &x in &nodes {
        let a = order(x);
        for &h in &steps {
            if x - k as f64 * h < u.0 - 1e-12 || x + k as f64 * h > u.1 + 1e-12 {
                continue;
            }
            for s in [h, -h] {
                admissible += 1;
                let q = difference_unchecked(f, x, s, k).abs() / h.powf(a);
                if q > best.0 {
                    best = (q, (x, s));
                }
            }
        }
    }
    if admissible == 0 {
        return Err(Error::EmptyStencil(format!("no step with B(x,{k}|h|) inside the box")));
    }
    Ok(ZygmundNorm { sup_part, seminorm_part: best.0, diff_order: k, order_sup, argmax: best.1 })
}

fn box_nodes(grid: &Grid, u: (f64, f64)) -> Vec<f64> {
    grid.axis().into_iter().filter(|&x| x >= u.0 - 1e-12 && x <= u.1 + 1e-12).collect()
}

/// `2^{-j}` for `j ≥ 0` down to the grid spacing.
fn dyadic_steps(spacing: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut h = 1.0;
    while h >= spacing * (1.0 - 1e-12) {
        v.push(h);
        h *= 0.5;
    }
    if v.is_empty() {
        v.push(spacing);
    }
    v
}

/// Default step set `0.25·2^{-j}`, `j = 0..7`.
pub fn default_h_set() -> Vec<f64> {
    dyadic_h_set(0.25, 8)
}

/// `h0·2^{-j}` for `j = 0..count`.
pub fn dyadic_h_set(h0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| h0 * 0.5f64.powi(j as i32)).collect()
}

/// Dyadic steps from `h0` down to at least `4·spacing`.
pub fn grid_safe_h_set(h0: f64, spacing: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut h = h0;
    while h >= 4.0 * spacing * (1.0 - 1e-12) {
        v.push(h);
        h *= 0.5;
    }
    v
}

/// Diagnostic attached to a local exponent estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolderFlag {
    Ok,
    SmoothSaturated,
    ZeroDifferences,
    /// Estimate within 0.05 of 1, where Lipschitz and Zygmund-1 behaviour are indistinguishable.
    OrderOneAmbiguous,
}

impl HolderFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            HolderFlag::Ok => "ok",
            HolderFlag::SmoothSaturated => "smooth_saturated",
            HolderFlag::ZeroDifferences => "zero_differences",
            HolderFlag::OrderOneAmbiguous => "order_one_ambiguous",
        }
    }
}

/// Local exponent estimate at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub x: f64,
    pub kappa_hat: f64,
    pub constant_hat: f64,
    pub r2: f64,
    pub h_range: (f64, f64),
    pub flag: HolderFlag,
    pub order: usize,
    /// Steps discarded because the difference was negligible or left the domain.
    pub dropped: usize,
}

/// Regress `log|Δ_h^order f(x)|` on `log h` over `h_set`, taking at each step the
/// largest difference over the stencils `x − j h, …, x + (order − j) h` that contain `x`.
pub fn local_exponent<F: ScalarFunction + ?Sized>(f: &F, x: f64, h_set: &[f64], order: usize) -> HolderReport {
    let (lo, hi) = f.domain();
    let mut raw = Vec::with_capacity(h_set.len());
    let mut scale: f64 = 0.0;
    let mut dropped = 0;
    for &h in h_set {
        let reach = order as f64 * h;
        let mut d: Option<f64> = None;
        for shift in 0..=order {
            let start = x - shift as f64 * h;
            if start < lo || start + reach > hi {
                continue;
            }
            for j in 0..=order {
                scale = scale.max(f.value(start + j as f64 * h).abs());
            }
            let v = difference_unchecked(f, start, h, order).abs();
            d = Some(d.map_or(v, |w: f64| w.max(v)));
        }
        match d {
            Some(v) => raw.push((h, v)),
            None => dropped += 1,
        }
    }
    let threshold = 1e-13 * scale;
    let pts: Vec<(f64, f64)> = raw
        .iter()
        .filter(|(_, d)| *d > threshold && *d > 0.0)
        .map(|&(h, d)| (h.ln(), d.ln()))
        .collect();
    dropped += raw.len() - pts.len();
    let h_range = (
        h_set.iter().cloned().fold(f64::INFINITY, f64::min),
        h_set.iter().cloned().fold(0.0, f64::max),
    );
    let cap = order as f64;
    if pts.len() < 2 {
        return HolderReport {
            x,
            kappa_hat: cap,
            constant_hat: 0.0,
            r2: 0.0,
            h_range,
            flag: HolderFlag::ZeroDifferences,
            order,
            dropped,
        };
    }
    let slope = ls_slope(&pts);
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    let kappa_hat = slope.clamp(0.0, cap);
    let flag = if kappa_hat >= cap - 0.05 {
        HolderFlag::SmoothSaturated
    } else if (kappa_hat - 1.0).abs() <= 0.05 {
        HolderFlag::OrderOneAmbiguous
    } else {
        HolderFlag::Ok
    };
    HolderReport { x, kappa_hat, constant_hat: intercept.exp(), r2, h_range, flag, order, dropped }
}

/// Outcome of [`interp_bound_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationCheck {
    pub holds: bool,
    pub worst_ratio: f64,
    pub m1: f64,
    pub m2: f64,
    pub samples: usize,
}

fn grid_step_pairs(grid: &Grid, reach: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut j = 1;
    while reach * j < grid.n {
        for i in 0..grid.n - reach * j {
            pairs.push((i, j));
        }
        j *= 2;
    }
    pairs
}

/// Check `|Δ_h²f(x)| ≤ |h|^κ max{M₁ r^{2−κ}, M₂ r^{−κ}}` on all grid stencils with
/// dyadic multiples of the spacing, with `M₁ = sup|Δ_h²f|/h²` and `M₂ = sup|Δ_h²f|`
/// measured on the same stencils.
pub fn interp_bound_check<F: ScalarFunction + ?Sized>(f: &F, grid: &Grid, kappa: f64, r: f64) -> InterpolationCheck {
    let dx = grid.spacing();
    let samples: Vec<(f64, f64)> = grid_step_pairs(grid, 2)
        .into_iter()
        .map(|(i, j)| {
            let h = j as f64 * dx;
            (h, difference_unchecked(f, grid.coord(i), h, 2).abs())
        })
        .collect();
    let m1 = samples.iter().map(|(h, d)| d / (h * h)).fold(0.0, f64::max);
    let m2 = samples.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let big = (m1 * r.powf(2.0 - kappa)).max(m2 * r.powf(-kappa));
    let mut worst: f64 = 0.0;
    for &(h, d) in &samples {
        let bound = h.powf(kappa) * big;
        if bound > 0.0 {
            worst = worst.max(d / bound);
        } else if d > 0.0 {
            worst = f64::INFINITY;
        }
    }
    InterpolationCheck { holds: worst <= 1.0 + 1e-12, worst_ratio: worst, m1, m2, samples: samples.len() }
}

/// Outcome of [`mixed_difference_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixedDifferenceReport {
    pub constant: f64,
    /// Sampled `C_b^γ` norm used for normalization.
    pub holder_norm: f64,
}

/// Largest `|Δ_h f(x) − Δ_h f(y)| / (‖f‖_{C^γ} |x−y|^a |h|^{γ−a})` over grid triples.
///
/// The norm is measured on every grid pair at distance at most 1, so it dominates every
/// sampled first difference used in the quotient.
pub fn mixed_difference_constant<F: ScalarFunction + ?Sized>(f: &F, grid: &Grid, gamma: f64, a: f64) -> MixedDifferenceReport {
    let dx = grid.spacing();
    let vals: Vec<f64> = grid.axis().iter().map(|&x| f.value(x)).collect();
    let n = vals.len();
    let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut semi: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let h = (j - i) as f64 * dx;
            if h > 1.0 + 1e-12 {
                break;
            }
            semi = semi.max((vals[j] - vals[i]).abs() / h.powf(gamma));
        }
    }
    let norm = sup + semi;
    if norm == 0.0 {
        return MixedDifferenceReport { constant: 0.0, holder_norm: 0.0 };
    }
    let stride = (n / 60).max(1);
    let idx: Vec<usize> = (0..n).step_by(stride).collect();
    let mut best: f64 = 0.0;
    for &k in idx.iter().skip(1) {
        let h = k as f64 * dx;
        for &i in &idx {
            if i + k >= n {
                break;
            }
            let di = vals[i + k] - vals[i];
            for &j in &idx {
                if j <= i || j + k >= n {
                    continue;
                }
                let dj = vals[j + k] - vals[j];
                let dxy = (j - i) as f64 * dx;
                let q = (di - dj).abs() / (norm * dxy.powf(a) * h.powf(gamma - a));
                best = best.max(q);
            }
        }
    }
    MixedDifferenceReport { constant: best, holder_norm: norm }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_examples() {
        let sq = |x: f64| x * x;
        for &h in &[0.1, -0.7, 3.0] {
            assert!((iterated_difference(&sq, 0.4, h, 2).unwrap() - 2.0 * h * h).abs() < 1e-12);
        }
        let c = |_x: f64| 5.0;
        assert_eq!(iterated_difference(&c, 1.0, 0.3, 3).unwrap(), 0.0);
        let cube = |x: f64| x * x * x;
        assert_eq!(iterated_difference(&cube, 0.0, 1.0, 2).unwrap(), 6.0);
    }

    #[test]
    fn difference_recursion_matches_binomial() {
        let f = |x: f64| (3.0 * x).sin() + x.abs().powf(0.6);
        let (x, h) = (0.37, 0.11);
        for m in 2..=4 {
            let rec = difference_unchecked(&f, x + h, h, m - 1) - difference_unchecked(&f, x, h, m - 1);
            assert!((rec - difference_unchecked(&f, x, h, m)).abs() < 1e-13);
        }
    }

    #[test]
    fn domain_error() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let gf = crate::grid::sample_line(|x| x, &g).unwrap();
        assert!(matches!(iterated_difference(&gf, 0.9, 0.1, 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn saturation_and_zero_flags() {
        let r = local_exponent(&f64::cos, 0.3, &default_h_set(), 2);
        assert!(r.kappa_hat >= 1.95);
        assert_eq!(r.flag, HolderFlag::SmoothSaturated);
        let r = local_exponent(&|x: f64| 2.0 * x + 1.0, 0.3, &default_h_set(), 2);
        assert_eq!(r.flag, HolderFlag::ZeroDifferences);
        let r = local_exponent(&|x: f64| x.abs(), 0.0, &default_h_set(), 2);
        assert_eq!(r.flag, HolderFlag::OrderOneAmbiguous);
    }
}
