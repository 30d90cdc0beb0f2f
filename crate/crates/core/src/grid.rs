//! Regular lattices and sampled functions.

use crate::error::{Error, Result};

/// Regular lattice in one or two dimensions (same bounds on each axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::Grid(format!("dimension {dim} not in {{1,2}}")));
        }
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || n < 2 {
            return Err(Error::Grid(format!("need lo < hi and n ≥ 2 (got {lo}, {hi}, {n})")));
        }
        Ok(Self { dim, lo, hi, n })
    }

    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(1, lo, hi, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    /// Axis coordinate of index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        if i == self.n - 1 {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Point of flat index `k` (row-major, last axis fastest).
    pub fn point(&self, k: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coord(k), 0.0],
            _ => [self.coord(k / self.n), self.coord(k % self.n)],
        }
    }
}

/// Real function of one variable with an optional domain of definition.
pub trait ScalarFunction {
    fn value(&self, x: f64) -> f64;
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

impl<F: Fn(f64) -> f64> ScalarFunction for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Function samples aligned to a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub sup_norm: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { grid, values, sup_norm })
    }

    /// Linear interpolation in 1-D, clamped to the boundary values outside the grid.
    pub fn interp_linear(&self, x: f64) -> f64 {
        let g = &self.grid;
        let s = ((x - g.lo) / g.spacing()).clamp(0.0, (g.n - 1) as f64);
        let i = (s.floor() as usize).min(g.n - 2);
        let w = s - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Cubic (Catmull–Rom) interpolation in 1-D, clamped outside the grid.
    pub fn interp_cubic(&self, x: f64) -> f64 {
        let g = &self.grid;
        let n = g.n;
        if n < 4 {
            return self.interp_linear(x);
        }
        let s = ((x - g.lo) / g.spacing()).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        let at = |k: isize| self.values[k.clamp(0, n as isize - 1) as usize];
        let (p0, p1, p2, p3) = (at(i as isize - 1), at(i as isize), at(i as isize + 1), at(i as isize + 2));
        let w2 = w * w;
        0.5 * (2.0 * p1 + (p2 - p0) * w + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * w2
            + (3.0 * (p1 - p2) + p3 - p0) * w2 * w)
    }
}

impl ScalarFunction for GridFunction {
    fn value(&self, x: f64) -> f64 {
        self.interp_linear(x)
    }
    fn domain(&self) -> (f64, f64) {
        (self.grid.lo, self.grid.hi)
    }
}

/// Sample `f` on every node of `grid` (2-D nodes are passed as `[x1, x2]`).
pub fn sample_on_grid<F: Fn(&[f64]) -> f64>(f: F, grid: &Grid) -> Result<GridFunction> {
    let values = (0..grid.len())
        .map(|k| {
            let p = grid.point(k);
            f(&p[..grid.dim])
        })
        .collect();
    GridFunction::new(*grid, values)
}

/// Sample a 1-D function on a 1-D grid.
pub fn sample_line<F: Fn(f64) -> f64>(f: F, grid: &Grid) -> Result<GridFunction> {
    sample_on_grid(|p| f(p[0]), grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_function() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let s = sample_line(|_| 0.0, &g).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert_eq!(s.sup_norm, 0.0);
    }

    #[test]
    fn identity_two_nodes() {
        let g = Grid::line(0.0, 1.0, 2).unwrap();
        assert_eq!(sample_line(|x| x, &g).unwrap().values, vec![0.0, 1.0]);
    }

    #[test]
    fn cosine_hits_extremum() {
        let g = Grid::line(-PI, PI, 101).unwrap();
        assert_eq!(sample_line(f64::cos, &g).unwrap().sup_norm, 1.0);
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::line(-1.0, 1.0, 3).unwrap();
        assert_eq!(sample_line(|x| 1.0 / x, &g), Err(Error::NonFinite { index: 1 }));
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid::line(1.0, 0.0, 5).is_err());
        assert!(Grid::line(0.0, 1.0, 1).is_err());
        assert!(Grid::new(3, 0.0, 1.0, 4).is_err());
    }

    #[test]
    fn two_dimensional_sampling() {
        let g = Grid::new(2, 0.0, 1.0, 3).unwrap();
        let s = sample_on_grid(|p| p[0] + 10.0 * p[1], &g).unwrap();
        assert_eq!(s.values[5], 0.5 + 10.0);
    }

    #[test]
    fn cubic_interpolation_reproduces_quadratics() {
        let g = Grid::line(-1.0, 1.0, 41).unwrap();
        let s = sample_line(|x| x * x, &g).unwrap();
        assert!((s.interp_cubic(0.3333) - 0.3333f64.powi(2)).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn sampling_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = Grid::line(-2.0, 2.0, 33).unwrap();
            let f = sample_line(f64::sin, &g).unwrap();
            let h = sample_line(|x| x * x, &g).unwrap();
            let c = sample_line(|x| a * x.sin() + b * x * x, &g).unwrap();
            for i in 0..g.n {
                proptest::prop_assert!((c.values[i] - (a * f.values[i] + b * h.values[i])).abs() < 1e-12);
            }
        }
    }
}
