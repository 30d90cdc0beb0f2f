//! Periodic pseudo-spectral operators on a one-dimensional torus.
//!
//! The frozen-coefficient operators `P₀(τ)` and `F(τ)` act on grid vectors.
//! Their dependence on the column parameters `(α(y), m(y))` and on the row
//! exponent `α(x)` is resolved by Chebyshev interpolation in the parameters,
//! so every application costs a fixed number of FFTs.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, ScalarFunction};
use crate::quad::ChebyshevInterp;
use crate::symbol::Symbol;

/// Periodic grid `x_j = −L + j·dx`, `j = 0..n`, with FFT plans.
#[derive(Clone)]
pub struct Torus {
    pub half_width: f64,
    pub n: usize,
    pub dx: f64,
    /// `|ξ_k|` in FFT order.
    pub freq: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Torus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Torus[-{0}, {0}) n={1}", self.half_width, self.n)
    }
}

impl Torus {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if half_width.is_nan() || half_width <= 0.0 || n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Grid(format!("torus needs L > 0 and even n ≥ 8 (got {half_width}, {n})")));
        }
        let dx = 2.0 * half_width / n as f64;
        let base = PI / half_width;
        let freq = (0..n)
            .map(|k| if k <= n / 2 { k as f64 * base } else { (n - k) as f64 * base })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_width,
            n,
            dx,
            freq,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// The nodes as a (non-periodic) [`Grid`].
    pub fn grid(&self) -> Grid {
        Grid { dim: 1, lo: -self.half_width, hi: self.half_width - self.dx, n: self.n }
    }

    pub fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        self.fft.process(&mut buf);
        buf
    }

    /// Inverse transform, keeping the real part and normalizing by `n`.
    pub fn inverse_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.ifft.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    /// Fourier coefficients of the band-limited unit mass at `y`.
    pub fn delta_coeffs(&self, y: f64) -> Vec<Complex64> {
        let base = PI / self.half_width;
        (0..self.n)
            .map(|k| {
                let kk = if k <= self.n / 2 { k as f64 } else { k as f64 - self.n as f64 };
                Complex64::from_polar(1.0 / self.dx, -kk * base * (y + self.half_width))
            })
            .collect()
    }

    /// Trigonometric interpolant of the coefficients `c` at `x`.
    pub fn eval_coeffs(&self, c: &[Complex64], x: f64) -> f64 {
        let n = self.n;
        let theta = PI * (x + self.half_width) / self.half_width;
        let step = Complex64::from_polar(1.0, theta);
        let mut z = step;
        let mut acc = c[0].re;
        for ck in c.iter().take(n / 2).skip(1) {
            acc += 2.0 * (ck * z).re;
            z *= step;
        }
        acc += (c[n / 2] * z).re;
        acc / n as f64
    }

    /// `dx·Σ|v|`.
    pub fn l1(&self, v: &[f64]) -> f64 {
        self.dx * v.iter().map(|x| x.abs()).sum::<f64>()
    }

    /// `dx·Σv`.
    pub fn integral(&self, v: &[f64]) -> f64 {
        self.dx * v.iter().sum::<f64>()
    }
}

/// Periodic grid function evaluated by trigonometric interpolation.
#[derive(Debug, Clone)]
pub struct TorusFunction {
    pub torus: Torus,
    pub values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl TorusFunction {
    pub fn new(torus: Torus, values: Vec<f64>) -> Self {
        let coeffs = torus.forward(&values);
        Self { torus, values, coeffs }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_grid_function(&self) -> Result<GridFunction> {
        GridFunction::new(self.torus.grid(), self.values.clone())
    }
}

impl ScalarFunction for TorusFunction {
    fn value(&self, x: f64) -> f64 {
        self.torus.eval_coeffs(&self.coeffs, x)
    }
}

/// Time dependence of an operator application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeKernel {
    /// `P₀(τ)`, multiplier `exp(−τ q_y)`.
    Density(f64),
    /// `∫₀^τ P₀(σ) dσ`.
    DensityIntegral(f64),
    /// `F(τ)`, multiplier `(q_y − q_x) exp(−τ q_y)`.
    Correction(f64),
    /// `∫₀^τ F(σ) dσ`.
    CorrectionIntegral(f64),
    /// `∫₀^τ e^{−λσ} P₀(σ) dσ` as `(λ, τ)`.
    DiscountedDensityIntegral(f64, f64),
}

impl TimeKernel {
    fn is_correction(self) -> bool {
        matches!(self, TimeKernel::Correction(_) | TimeKernel::CorrectionIntegral(_))
    }

    /// Multiplier `E(q)` applied to the frozen symbol value `q`.
    #[inline]
    fn damping(self, q: f64) -> f64 {
        match self {
            TimeKernel::Density(t) | TimeKernel::Correction(t) => (-t * q).exp(),
            TimeKernel::DensityIntegral(t) | TimeKernel::CorrectionIntegral(t) => {
                let z = t * q;
                if z < 1e-8 {
                    t * (1.0 - 0.5 * z)
                } else {
                    -(-z).exp_m1() / q
                }
            }
            TimeKernel::DiscountedDensityIntegral(lambda, t) => {
                let r = lambda + q;
                let z = t * r;
                if z < 1e-8 {
                    t * (1.0 - 0.5 * z)
                } else {
                    -(-z).exp_m1() / r
                }
            }
        }
    }
}

/// Interpolation sizes for the parameter dependence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpSettings {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Extra nodes per unit width of the order range.
    pub nodes_per_order: f64,
    /// Extra nodes per unit width of the log-scale range.
    pub nodes_per_log_scale: f64,
}

impl Default for InterpSettings {
    fn default() -> Self {
        Self { min_nodes: 4, max_nodes: 16, nodes_per_order: 14.0, nodes_per_log_scale: 10.0 }
    }
}

fn node_count(width: f64, per: f64, s: &InterpSettings) -> usize {
    if width <= 1e-13 {
        1
    } else {
        ((s.min_nodes as f64 + per * width).ceil() as usize).clamp(s.min_nodes, s.max_nodes)
    }
}

/// Tables for applying `P₀(τ)` and `F(τ)` to grid vectors.
pub struct OperatorBank {
    pub torus: Torus,
    symbol: Symbol,
    /// Column nodes `(ρ_a, μ_a)`.
    col_params: Vec<(f64, f64)>,
    /// `c_a(z_j)` per column node.
    col_weights: Vec<Vec<f64>>,
    /// `μ_a |ξ_k|^{ρ_a}`.
    col_symbol: Vec<Vec<f64>>,
    /// `|ξ_k|^{β_b}`.
    row_powers: Vec<Vec<f64>>,
    /// `m(x_j) ℓ_b(α(x_j))`.
    row_weights: Vec<Vec<f64>>,
}

impl std::fmt::Debug for OperatorBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OperatorBank({:?}, columns={}, rows={})", self.torus, self.col_params.len(), self.row_powers.len())
    }
}

impl OperatorBank {
    pub fn new(torus: Torus, symbol: Symbol, interp: InterpSettings) -> Result<Self> {
        let nodes = torus.nodes();
        let alphas: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let a = symbol.order(x);
                if a > 0.0 && a <= 2.0 {
                    Ok(a)
                } else {
                    Err(Error::Range { value: a, at: x })
                }
            })
            .collect::<Result<_>>()?;
        let log_m: Vec<f64> = nodes.iter().map(|&x| symbol.scale_at(x).ln()).collect();
        let (a_lo, a_hi) = min_max(&alphas);
        let (m_lo, m_hi) = min_max(&log_m);
        let rho_interp = ChebyshevInterp::new(a_lo, a_hi, node_count(a_hi - a_lo, interp.nodes_per_order, &interp));
        let m_interp = ChebyshevInterp::new(m_lo, m_hi, node_count(m_hi - m_lo, interp.nodes_per_log_scale, &interp));

        let mut col_params = Vec::new();
        for &r in &rho_interp.points {
            for &lm in &m_interp.points {
                col_params.push((r, lm.exp()));
            }
        }
        let n = torus.n;
        let na = col_params.len();
        let mut col_weights = vec![vec![0.0; n]; na];
        let mut br = vec![0.0; rho_interp.len()];
        let mut bm = vec![0.0; m_interp.len()];
        for j in 0..n {
            rho_interp.basis(alphas[j], &mut br);
            m_interp.basis(log_m[j], &mut bm);
            for (i, &wr) in br.iter().enumerate() {
                for (k, &wm) in bm.iter().enumerate() {
                    col_weights[i * bm.len() + k][j] = wr * wm;
                }
            }
        }
        let col_symbol = col_params
            .iter()
            .map(|&(r, mu)| torus.freq.iter().map(|&xi| mu * xi.powf(r)).collect())
            .collect();
        let row_powers = rho_interp
            .points
            .iter()
            .map(|&b| torus.freq.iter().map(|&xi| xi.powf(b)).collect())
            .collect();
        let mut row_weights = vec![vec![0.0; n]; rho_interp.len()];
        for j in 0..n {
            rho_interp.basis(alphas[j], &mut br);
            let m = log_m[j].exp();
            for (b, &w) in br.iter().enumerate() {
                row_weights[b][j] = m * w;
            }
        }
        Ok(Self { torus, symbol, col_params, col_weights, col_symbol, row_powers, row_weights })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn column_nodes(&self) -> usize {
        self.col_params.len()
    }

    /// Apply `kernel` to the grid vector `v`.
    pub fn apply(&self, kernel: TimeKernel, v: &[f64]) -> Vec<f64> {
        let n = self.torus.n;
        let mut damped = vec![Complex64::new(0.0, 0.0); n];
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        let corr = kernel.is_correction();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (a, w) in self.col_weights.iter().enumerate() {
            for j in 0..n {
                buf[j] = Complex64::new(w[j] * v[j], 0.0);
            }
            let spectrum = self.torus.forward_complex(std::mem::take(&mut buf));
            let qa = &self.col_symbol[a];
            for k in 0..n {
                let e = kernel.damping(qa[k]);
                damped[k] += spectrum[k] * e;
                if corr {
                    full[k] += spectrum[k] * (qa[k] * e);
                }
            }
            buf = spectrum;
        }
        if !corr {
            return self.torus.inverse_real(damped);
        }
        let mut out = self.torus.inverse_real(full);
        self.subtract_row_part(&damped, &mut out);
        out
    }

    /// `out −= Σ_b r_b ⊙ IFFT(|ξ|^{β_b} S)`.
    fn subtract_row_part(&self, damped: &[Complex64], out: &mut [f64]) {
        for (pw, rw) in self.row_powers.iter().zip(&self.row_weights) {
            let spectrum: Vec<Complex64> = damped.iter().zip(pw).map(|(s, p)| s * p).collect();
            let back = self.torus.inverse_real(spectrum);
            for j in 0..out.len() {
                out[j] -= rw[j] * back[j];
            }
        }
    }

    /// Apply `kernel` to the unit mass at `y`, with the column parameters frozen exactly at `y`.
    pub fn apply_point_source(&self, kernel: TimeKernel, y: f64) -> Vec<f64> {
        let rho = self.symbol.order(y);
        let mu = self.symbol.scale_at(y);
        let delta = self.torus.delta_coeffs(y);
        let mut damped = Vec::with_capacity(self.torus.n);
        let mut full = Vec::with_capacity(self.torus.n);
        for (k, d) in delta.iter().enumerate() {
            let q = mu * self.torus.freq[k].powf(rho);
            let e = kernel.damping(q);
            damped.push(d * e);
            full.push(d * (q * e));
        }
        if !kernel.is_correction() {
            return self.torus.inverse_real(damped);
        }
        let mut out = self.torus.inverse_real(full);
        self.subtract_row_part(&damped, &mut out);
        out
    }

    /// Apply the transpose (with respect to `dx`-weighted sums) of `kernel` to `w`.
    pub fn apply_transpose(&self, kernel: TimeKernel, w: &[f64]) -> Vec<f64> {
        let n = self.torus.n;
        let wf = self.torus.forward(w);
        let corr = kernel.is_correction();
        let mut row_sum = vec![Complex64::new(0.0, 0.0); n];
        if corr {
            for (pw, rw) in self.row_powers.iter().zip(&self.row_weights) {
                let weighted: Vec<f64> = w.iter().zip(rw).map(|(a, b)| a * b).collect();
                let s = self.torus.forward(&weighted);
                for k in 0..n {
                    row_sum[k] += s[k] * pw[k];
                }
            }
        }
        let mut out = vec![0.0; n];
        for (a, cw) in self.col_weights.iter().enumerate() {
            let qa = &self.col_symbol[a];
            let spectrum: Vec<Complex64> = (0..n)
                .map(|k| {
                    let e = kernel.damping(qa[k]);
                    if corr {
                        wf[k] * (qa[k] * e) - row_sum[k] * e
                    } else {
                        wf[k] * e
                    }
                })
                .collect();
            let back = self.torus.inverse_real(spectrum);
            for j in 0..n {
                out[j] += cw[j] * back[j];
            }
        }
        out
    }

    /// Unit mass at grid-aligned or arbitrary `x`, as a band-limited grid vector.
    pub fn point_mass(&self, x: f64) -> Vec<f64> {
        self.torus.inverse_real(self.torus.delta_coeffs(x))
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}
