//! Gauss–Legendre rules and panel helpers used by the integrators.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, 0.0);
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
                }
                dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + r * x))
            .sum::<f64>()
            * r
    }

    /// Mapped nodes and weights on [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + r * x, w * r))
    }
}

/// Shared 16-point rule.
pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Shared 8-point rule.
pub fn gl8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// Breakpoints `a, a·q, a·q², …` refined geometrically toward 0 and ending at `b`:
/// returns `[0, b·r^k, …, b·r, b]` with `levels` geometric panels.
pub fn geometric_breaks(b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(levels + 2);
    v.push(0.0);
    for k in (1..=levels).rev() {
        v.push(b * ratio.powi(k as i32));
    }
    v.push(b);
    v
}

/// Integrate over consecutive breakpoints with a shared rule.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(rule: &GaussLegendre, breaks: &[f64], mut f: F) -> f64 {
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .sum()
}

/// Barycentric weights for Chebyshev points of the second kind on [lo, hi].
#[derive(Debug, Clone)]
pub struct ChebyshevInterp {
    pub points: Vec<f64>,
    bary: Vec<f64>,
}

impl ChebyshevInterp {
    /// `n` Chebyshev–Lobatto points on [lo, hi]; a single point when the interval is degenerate.
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        if hi - lo <= 1e-13 * (1.0 + lo.abs()) || n <= 1 {
            return Self { points: vec![0.5 * (lo + hi)], bary: vec![1.0] };
        }
        let m = n - 1;
        let points = (0..=m)
            .map(|j| {
                let c = (std::f64::consts::PI * j as f64 / m as f64).cos();
                0.5 * (lo + hi) + 0.5 * (hi - lo) * c
            })
            .collect();
        let bary = (0..=m)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { points, bary }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Lagrange basis values at `x`, written into `out`.
    pub fn basis(&self, x: f64, out: &mut [f64]) {
        if self.points.len() == 1 {
            out[0] = 1.0;
            return;
        }
        if let Some(k) = self.points.iter().position(|&p| p == x) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
        let mut sum = 0.0;
        for (k, (&p, &b)) in self.points.iter().zip(&self.bary).enumerate() {
            let w = b / (x - p);
            out[k] = w;
            sum += w;
        }
        out.iter_mut().for_each(|v| *v /= sum);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let g = GaussLegendre::new(8);
        let val = g.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((val - 2f64.powi(16) / 16.0).abs() < 1e-9);
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_interpolates_smooth_function() {
        let c = ChebyshevInterp::new(1.2, 1.8, 12);
        let mut b = vec![0.0; c.len()];
        for &x in &[1.21, 1.5, 1.77] {
            c.basis(x, &mut b);
            let v: f64 = c.points.iter().zip(&b).map(|(p, w)| (3.0 * p).exp() * w).sum();
            assert!((v - (3.0 * x).exp()).abs() < 1e-9 * (3.0 * x).exp());
        }
    }
}
