//! Parametrix construction of the transition density for `q(x,ξ) = m(x)|ξ|^{α(x)}`.
//!
//! The density is `p = p₀ + p₀ ⊛ Φ` where `p₀` freezes the symbol at the
//! terminal point and `Φ = Σ_{i≥1} F^{⊛i}`. Pointwise `p₀` comes from
//! [`crate::stable`]; the correction `p₀ ⊛ Φ` is computed by Volterra sweeps
//! of grid vectors on a periodic grid (see [`crate::spectral`]).
//!
//! A sweep stores `ψ_i(τ) = F^{⊛i}` applied to a source on a log-spaced time
//! lattice `τ_min = τ_0 < … < τ_M = T`. Each convolution integral is split at
//! `t/2`, integrated with Gauss–Legendre rules in `log s` and `log(t − s)`,
//! and the end pieces of length `τ_min` use exactly time-integrated
//! multipliers. Off-lattice times use cubic interpolation of `τ ψ(τ)` in
//! `log τ`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::grid::ScalarFunction;
use crate::quad::{gl16, GaussLegendre};
use crate::spectral::{InterpSettings, OperatorBank, TimeKernel, Torus, TorusFunction};
use crate::stable::{damped_cosine_transform, levy_constant_closed_form, stable_pdf_1d};
use crate::symbol::Symbol;

/// Numerical settings of a [`ParametrixKernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParametrixSettings {
    /// Half-width `L` of the periodic box `[−L, L)`.
    pub half_width: f64,
    /// Grid points on the box (even).
    pub points: usize,
    /// Time horizon `T`.
    pub horizon: f64,
    /// Largest number of series terms.
    pub max_iterates: usize,
    /// Size of the last term at which the series stops.
    pub series_tol: f64,
    /// First lattice time `τ_min`.
    pub tau_min: f64,
    /// Lattice spacing in `log τ`.
    pub lattice_step: f64,
    /// Width of one quadrature panel in `log s`.
    pub panel_width: f64,
    /// Gauss–Legendre nodes per panel.
    pub panel_nodes: usize,
    pub interp: InterpSettings,
    /// Width of the bands at `±L` across which the coefficients are blended periodically.
    pub seam_band: f64,
    /// Relative tolerance for the resolvent extension beyond `T`.
    pub resolvent_tol: f64,
    /// Largest number of compositions with `P_T` in the resolvent.
    pub resolvent_max_steps: usize,
}

impl Default for ParametrixSettings {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            points: 2048,
            horizon: 1.0,
            max_iterates: 6,
            series_tol: 1e-4,
            tau_min: 1e-4,
            lattice_step: 0.25,
            panel_width: 1.5,
            panel_nodes: 4,
            interp: InterpSettings::default(),
            seam_band: 2.0,
            resolvent_tol: 1e-8,
            resolvent_max_steps: 30,
        }
    }
}

impl ParametrixSettings {
    /// Lighter settings for quick runs and tests.
    pub fn coarse() -> Self {
        Self { points: 512, lattice_step: 0.35, panel_width: 2.0, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon.is_nan() || self.horizon <= 0.0 {
            return Err(Error::Param("horizon must be positive".into()));
        }
        if self.max_iterates < 1 {
            return Err(Error::Param("at least one series term is required".into()));
        }
        if self.series_tol.is_nan() || self.series_tol <= 0.0 {
            return Err(Error::Param("series tolerance must be positive".into()));
        }
        if !(self.tau_min > 0.0 && self.tau_min < self.horizon / 4.0) {
            return Err(Error::Param("tau_min must lie in (0, T/4)".into()));
        }
        if !(self.seam_band > 0.0 && self.seam_band < 0.5 * self.half_width) {
            return Err(Error::Param("seam band must lie in (0, L/2)".into()));
        }
        if !(self.lattice_step > 0.0 && self.panel_width > 0.0) || self.panel_nodes < 1 {
            return Err(Error::Param("lattice and panel settings must be positive".into()));
        }
        Ok(())
    }
}

/// Log-uniform time lattice with cubic interpolation weights.
#[derive(Debug, Clone)]
struct TimeLattice {
    times: Vec<f64>,
    log0: f64,
    step: f64,
}

impl TimeLattice {
    fn new(tau_min: f64, horizon: f64, step: f64) -> Self {
        let span = (horizon / tau_min).ln();
        let m = (span / step).ceil().max(3.0) as usize;
        let step = span / m as f64;
        let log0 = tau_min.ln();
        let mut times: Vec<f64> = (0..=m).map(|k| (log0 + k as f64 * step).exp()).collect();
        times[m] = horizon;
        Self { times, log0, step }
    }

    fn len(&self) -> usize {
        self.times.len()
    }

    /// Four consecutive node indices and Lagrange weights for time `s`.
    fn weights(&self, s: f64) -> (usize, [f64; 4]) {
        let m = self.times.len() - 1;
        let p = ((s.ln() - self.log0) / self.step).clamp(0.0, m as f64);
        let i0 = (p.floor() as isize - 1).clamp(0, m as isize - 3) as usize;
        let mut w = [0.0; 4];
        for (k, wk) in w.iter_mut().enumerate() {
            let xk = (i0 + k) as f64;
            *wk = (0..4)
                .filter(|&j| j != k)
                .map(|j| {
                    let xj = (i0 + j) as f64;
                    (p - xj) / (xk - xj)
                })
                .product();
        }
        (i0, w)
    }

    /// `s·v(s)` interpolated from lattice values of `τ·v(τ)`.
    fn weighted_at(&self, values: &[Vec<f64>], s: f64) -> Vec<f64> {
        if let Some(k) = self.times.iter().position(|&t| (t - s).abs() <= 1e-14 * t) {
            return values[k].iter().map(|v| v * self.times[k]).collect();
        }
        let (i0, w) = self.weights(s);
        let n = values[0].len();
        let mut out = vec![0.0; n];
        for (k, wk) in w.iter().enumerate() {
            let tk = self.times[i0 + k];
            let c = wk * tk;
            for (o, v) in out.iter_mut().zip(&values[i0 + k]) {
                *o += c * v;
            }
        }
        out
    }

    fn value_at(&self, values: &[Vec<f64>], s: f64) -> Vec<f64> {
        let mut v = self.weighted_at(values, s);
        v.iter_mut().for_each(|x| *x /= s);
        v
    }
}

/// Whether a sweep uses the operators or their transposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Columns `Φ(t, ·, y)`, or `Φ(t)u` for a vector source.
    Forward,
    /// Rows `Φ(t, x, ·)`.
    Transpose,
}

/// What a sweep propagates.
#[derive(Debug, Clone)]
pub enum Source {
    /// Unit mass at a point.
    PointMass(f64),
    /// Grid vector on the kernel's torus.
    Vector(Vec<f64>),
}

/// Series terms `ψ_i = F^{⊛i}(source)` on the time lattice.
#[derive(Debug, Clone)]
pub struct Sweep {
    /// `terms[i][k]` is term `i+1` at lattice time `k`.
    pub terms: Vec<Vec<Vec<f64>>>,
    /// `∫₀^{τ_min} ψ_i`.
    pub heads: Vec<Vec<f64>>,
    /// Sum of all terms at each lattice time.
    pub totals: Vec<Vec<f64>>,
    pub head_total: Vec<f64>,
    /// `max_τ τ·‖ψ_i(τ)‖` per term.
    pub term_norms: Vec<f64>,
    pub iterates_used: usize,
    /// Factor `r/(1−r)` turning the last term into a remainder estimate.
    pub remainder_factor: f64,
    /// Term norms failed to decrease three times in a row.
    pub diverging: bool,
    pub direction: Direction,
}

impl Sweep {
    fn empty(n: usize, m: usize, direction: Direction) -> Self {
        Self {
            terms: Vec::new(),
            heads: Vec::new(),
            totals: vec![vec![0.0; n]; m],
            head_total: vec![0.0; n],
            term_norms: Vec::new(),
            iterates_used: 0,
            remainder_factor: 0.0,
            diverging: false,
            direction,
        }
    }
}

/// One evaluation of the transition density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub p0_part: f64,
    pub correction_part: f64,
    pub iterates_used: usize,
    pub est_error: f64,
}

/// Value of the series `Φ` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEval {
    pub value: f64,
    pub iterates_used: usize,
    pub est_error: f64,
    pub diverging: bool,
}

/// `∫ p(t, x, y) dy` split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassReport {
    pub p0_mass: f64,
    pub tail_mass: f64,
    pub correction_mass: f64,
}

impl MassReport {
    pub fn total(&self) -> f64 {
        self.p0_mass + self.tail_mass + self.correction_mass
    }
}

type SweepKey = (Direction, u64);

/// Transition density, semigroup and resolvent of a stable-like symbol.
pub struct ParametrixKernel {
    pub settings: ParametrixSettings,
    symbol: Symbol,
    bank: OperatorBank,
    lattice: TimeLattice,
    rule: GaussLegendre,
    rule_coarse: GaussLegendre,
    cache: Mutex<HashMap<SweepKey, Arc<Sweep>>>,
    ones: Mutex<Option<Arc<Propagator>>>,
}

impl std::fmt::Debug for ParametrixKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametrixKernel").field("settings", &self.settings).field("bank", &self.bank).finish()
    }
}

impl ParametrixKernel {
    pub fn new(symbol: Symbol, settings: ParametrixSettings) -> Result<Self> {
        settings.validate()?;
        let torus = Torus::new(settings.half_width, settings.points)?;
        let periodic = symbol.periodized(settings.half_width, settings.seam_band)?;
        let bank = OperatorBank::new(torus, periodic, settings.interp)?;
        let lattice = TimeLattice::new(settings.tau_min, settings.horizon, settings.lattice_step);
        let rule = GaussLegendre::new(settings.panel_nodes);
        let rule_coarse = GaussLegendre::new(settings.panel_nodes.saturating_sub(1).max(1));
        Ok(Self {
            settings,
            symbol,
            bank,
            lattice,
            rule,
            rule_coarse,
            cache: Mutex::new(HashMap::new()),
            ones: Mutex::new(None),
        })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn torus(&self) -> &Torus {
        &self.bank.torus
    }

    /// Lattice times of the sweeps.
    pub fn lattice_times(&self) -> &[f64] {
        &self.lattice.times
    }

    /// True when `F ≡ 0`, i.e. the symbol does not depend on position.
    pub fn is_trivial(&self) -> bool {
        self.symbol().is_spatially_constant()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t > 0.0 && t <= self.settings.horizon * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::Param(format!("time {t} outside (0, {}]", self.settings.horizon)))
        }
    }

    fn apply(&self, kernel: TimeKernel, v: &[f64], dir: Direction) -> Vec<f64> {
        match dir {
            Direction::Forward => self.bank.apply(kernel, v),
            Direction::Transpose => self.bank.apply_transpose(kernel, v),
        }
    }

    fn apply_source(&self, kernel: TimeKernel, src: &Source, dir: Direction) -> Vec<f64> {
        match (src, dir) {
            (Source::PointMass(y), Direction::Forward) => self.bank.apply_point_source(kernel, *y),
            (Source::PointMass(x), Direction::Transpose) => self.bank.apply_transpose(kernel, &self.bank.point_mass(*x)),
            (Source::Vector(v), _) => self.apply(kernel, v, dir),
        }
    }

    /// Gauss nodes in `log s` over `[a, b]`, as `(s, weight)` with `ds = s du`.
    fn log_nodes(&self, rule: &GaussLegendre, a: f64, b: f64) -> Vec<(f64, f64)> {
        let (ua, ub) = (a.ln(), b.ln());
        let panels = ((ub - ua) / self.settings.panel_width).ceil().max(1.0) as usize;
        let h = (ub - ua) / panels as f64;
        let mut out = Vec::with_capacity(panels * rule.nodes.len());
        for p in 0..panels {
            let lo = ua + p as f64 * h;
            out.extend(rule.mapped(lo, lo + h).map(|(u, w)| (u.exp(), w)));
        }
        out
    }

    /// `∫₀^t K(t−s) φ(s) ds` with `φ` known on the lattice.
    #[allow(clippy::too_many_arguments)]
    fn volterra<K, KI>(
        &self,
        rule: &GaussLegendre,
        t: f64,
        phi: &[Vec<f64>],
        phi_head: &[f64],
        phi_t: &[f64],
        kernel: K,
        kernel_int: KI,
        dir: Direction,
    ) -> Vec<f64>
    where
        K: Fn(f64) -> TimeKernel,
        KI: Fn(f64) -> TimeKernel,
    {
        let tau0 = self.settings.tau_min;
        if t < 2.0 * tau0 * (1.0 + 1e-9) {
            return self.apply(kernel_int(t), phi_t, dir);
        }
        let mut acc = self.apply(kernel(t), phi_head, dir);
        let add = |acc: &mut Vec<f64>, v: Vec<f64>, w: f64| {
            acc.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
        };
        for (s, w) in self.log_nodes(rule, tau0, 0.5 * t) {
            let g = self.lattice.weighted_at(phi, s);
            add(&mut acc, self.apply(kernel(t - s), &g, dir), w);
            let g = self.lattice.weighted_at(phi, t - s);
            let g: Vec<f64> = g.iter().map(|v| v * s / (t - s)).collect();
            add(&mut acc, self.apply(kernel(s), &g, dir), w);
        }
        add(&mut acc, self.apply(kernel_int(tau0), phi_t, dir), 1.0);
        acc
    }

    fn norm(&self, v: &[f64], src: &Source, dir: Direction) -> f64 {
        match (src, dir) {
            (Source::Vector(_), Direction::Forward) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            _ => self.torus().l1(v),
        }
    }

    /// Build the series sweep for `src`. Point sources stop once a term falls below the
    /// series tolerance; vector sources always use `max_iterates` terms so that
    /// propagation is linear.
    pub fn sweep(&self, src: &Source, dir: Direction) -> Sweep {
        let n = self.torus().n;
        let m = self.lattice.len();
        if self.is_trivial() {
            return Sweep::empty(n, m, dir);
        }
        let s = &self.settings;
        let tau0 = s.tau_min;
        let times = self.lattice.times.clone();
        let mut out = Sweep::empty(n, m, dir);
        let first: Vec<Vec<f64>> = times.iter().map(|&t| self.apply_source(TimeKernel::Correction(t), src, dir)).collect();
        let head = self.apply_source(TimeKernel::CorrectionIntegral(tau0), src, dir);
        let push = |out: &mut Sweep, term: Vec<Vec<f64>>, head: Vec<f64>, norm: f64| {
            for (tot, v) in out.totals.iter_mut().zip(&term) {
                tot.iter_mut().zip(v).for_each(|(a, b)| *a += b);
            }
            out.head_total.iter_mut().zip(&head).for_each(|(a, b)| *a += b);
            out.terms.push(term);
            out.heads.push(head);
            out.term_norms.push(norm);
        };
        let weighted_norm = |term: &[Vec<f64>]| {
            term.iter().zip(&times).map(|(v, t)| t * self.norm(v, src, dir)).fold(0.0, f64::max)
        };
        let n1 = weighted_norm(&first);
        push(&mut out, first, head, n1);
        let mut rising = 0;
        while out.terms.len() < s.max_iterates {
            let last = out.term_norms[out.term_norms.len() - 1];
            if last == 0.0 || (last <= s.series_tol && matches!(src, Source::PointMass(_))) {
                break;
            }
            let prev = out.terms.last().unwrap();
            let prev_head = out.heads.last().unwrap();
            let next: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    self.volterra(&self.rule, times[k], prev, prev_head, &prev[k], TimeKernel::Correction, TimeKernel::CorrectionIntegral, dir)
                })
                .collect();
            // ∫₀^{τ0} ψ ≈ τ0 ψ(τ0)/β for ψ(s) ~ s^{β−1}; bounded terms for vector sources
            let beta = match src {
                Source::Vector(_) => 1.0,
                Source::PointMass(_) => {
                    let (a, b) = (self.norm(&next[0], src, dir), self.norm(&next[1], src, dir));
                    let fit = 1.0 + (b / a).ln() / (times[1] / times[0]).ln();
                    if fit.is_finite() { fit.clamp(0.2, 3.0) } else { 1.0 }
                }
            };
            let head: Vec<f64> = next[0].iter().map(|v| v * tau0 / beta).collect();
            let nn = weighted_norm(&next);
            rising = if nn >= last { rising + 1 } else { 0 };
            push(&mut out, next, head, nn);
            if rising >= 3 {
                out.diverging = true;
            }
        }
        out.iterates_used = out.terms.len();
        let k = out.term_norms.len();
        out.remainder_factor = if k >= 2 {
            let r = out.term_norms[k - 1] / out.term_norms[k - 2];
            if r < 1.0 {
                r / (1.0 - r)
            } else {
                s.max_iterates as f64
            }
        } else {
            1.0
        };
        if out.term_norms[k - 1] <= s.series_tol && k < s.max_iterates {
            out.remainder_factor = out.remainder_factor.min(1.0);
        }
        out
    }

    fn cached_sweep(&self, point: f64, dir: Direction) -> Arc<Sweep> {
        let key = (dir, point.to_bits());
        if let Some(s) = self.cache.lock().expect("sweep cache poisoned").get(&key) {
            return s.clone();
        }
        let sweep = Arc::new(self.sweep(&Source::PointMass(point), dir));
        self.cache.lock().expect("sweep cache poisoned").insert(key, sweep.clone());
        sweep
    }

    /// Sum of the series at time `t` from a sweep.
    pub fn sweep_total_at(&self, sweep: &Sweep, t: f64) -> Vec<f64> {
        self.lattice.value_at(&sweep.totals, t)
    }

    /// `∫₀^t P₀(t−s) w(s) ds` for the total `w` of a forward sweep.
    fn correction_vector(&self, sweep: &Sweep, t: f64, rule: &GaussLegendre) -> Vec<f64> {
        if sweep.terms.is_empty() {
            return vec![0.0; self.torus().n];
        }
        let at_t = self.lattice.value_at(&sweep.totals, t);
        self.volterra(rule, t, &sweep.totals, &sweep.head_total, &at_t, TimeKernel::Density, TimeKernel::DensityIntegral, Direction::Forward)
    }

    /// Correction at `x` with an error estimate from the last series term and a lower-order time rule.
    fn correction_at(&self, sweep: &Sweep, t: f64, x: f64) -> (f64, f64) {
        if sweep.terms.is_empty() {
            return (0.0, 0.0);
        }
        let eval = |v: Vec<f64>| TorusFunction::new(self.torus().clone(), v).value(x);
        let value = eval(self.correction_vector(sweep, t, &self.rule));
        let coarse = eval(self.correction_vector(sweep, t, &self.rule_coarse));
        let k = sweep.terms.len() - 1;
        let at_t = self.lattice.value_at(&sweep.terms[k], t);
        let last = self.volterra(
            &self.rule,
            t,
            &sweep.terms[k],
            &sweep.heads[k],
            &at_t,
            TimeKernel::Density,
            TimeKernel::DensityIntegral,
            Direction::Forward,
        );
        let series = sweep.remainder_factor * eval(last).abs();
        (value, series + (value - coarse).abs())
    }

    /// `p₀(t, x, y) = p^{α(y)}(t·m(y), x − y)`.
    pub fn p0(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.check_time(t)?;
        let sym = self.symbol();
        stable_pdf_1d(sym.order(y), t * sym.scale_at(y), x - y)
    }

    /// Pointwise `F(t, x, y)` by radial quadrature.
    pub fn kernel_f(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.check_time(t)?;
        kernel_f_value(self.symbol(), t, x, y)
    }

    /// `Φ(t, x, y)` from the column sweep at `y`.
    pub fn phi_series(&self, t: f64, x: f64, y: f64) -> Result<PhiEval> {
        self.check_time(t)?;
        if self.is_trivial() {
            return Ok(PhiEval { value: 0.0, iterates_used: 0, est_error: 0.0, diverging: false });
        }
        let sweep = self.cached_sweep(y, Direction::Forward);
        let total = TorusFunction::new(self.torus().clone(), self.sweep_total_at(&sweep, t));
        let last = TorusFunction::new(
            self.torus().clone(),
            self.lattice.value_at(&sweep.terms[sweep.terms.len() - 1], t),
        );
        Ok(PhiEval {
            value: total.value(x),
            iterates_used: sweep.iterates_used,
            est_error: sweep.remainder_factor * last.value(x).abs(),
            diverging: sweep.diverging,
        })
    }

    /// `sup` over the given rows of `∫|Φ(t, x, y)| dy` at every lattice time.
    pub fn phi_row_norms(&self, rows: &[f64]) -> Vec<(f64, f64)> {
        let times = self.lattice.times.clone();
        let mut best = vec![0.0f64; times.len()];
        for &x in rows {
            let sweep = self.cached_sweep(x, Direction::Transpose);
            for (k, b) in best.iter_mut().enumerate() {
                *b = b.max(self.torus().l1(&sweep.totals[k]));
            }
        }
        times.into_iter().zip(best).collect()
    }

    /// Row sweep `Φ(t, x, ·)` and its terms.
    pub fn phi_row(&self, x: f64) -> Arc<Sweep> {
        self.cached_sweep(x, Direction::Transpose)
    }

    /// Column sweep `Φ(t, ·, y)` and its terms.
    pub fn phi_column(&self, y: f64) -> Arc<Sweep> {
        self.cached_sweep(y, Direction::Forward)
    }

    /// `p(t, x, y) = p₀ + (p₀ ⊛ Φ)`.
    pub fn transition_density(&self, t: f64, x: f64, y: f64) -> Result<KernelEval> {
        let p0 = self.p0(t, x, y)?;
        if self.is_trivial() {
            return Ok(KernelEval { value: p0, p0_part: p0, correction_part: 0.0, iterates_used: 0, est_error: 0.0 });
        }
        let sweep = self.cached_sweep(y, Direction::Forward);
        let (c, est_error) = self.correction_at(&sweep, t, x);
        Ok(KernelEval { value: p0 + c, p0_part: p0, correction_part: c, iterates_used: sweep.iterates_used, est_error })
    }

    /// Correction `(p₀ ⊛ Φ)(t, ·, y)` on the whole grid.
    pub fn correction_column(&self, t: f64, y: f64) -> Result<TorusFunction> {
        self.check_time(t)?;
        let sweep = self.cached_sweep(y, Direction::Forward);
        Ok(TorusFunction::new(self.torus().clone(), self.correction_vector(&sweep, t, &self.rule)))
    }

    /// Bound on the mass that periodic images at `y + 2Lk`, `k ≠ 0`, add to `p(t, x, y)` on the torus.
    pub fn periodization_bound(&self, t: f64, x: f64, y: f64) -> f64 {
        let sym = self.symbol();
        let (lo, hi) = (sym.alpha.alpha_low, sym.alpha.alpha_high);
        let m_hi = sym.scale.as_ref().map_or(1.0, |s| s.high);
        let period = 2.0 * self.settings.half_width;
        let tail = |d: f64| {
            (0..=8)
                .map(|j| lo + (hi - lo) * j as f64 / 8.0)
                .filter(|&a| a < 2.0)
                .map(|a| levy_constant_closed_form(a, 1) * d.powf(-1.0 - a))
                .fold(0.0, f64::max)
        };
        (1..=4)
            .flat_map(|k| [-1.0, 1.0].map(|sgn| (x - y + sgn * k as f64 * period).abs()))
            .map(|d| t * m_hi * tail(d))
            .sum()
    }

    /// Grid column `p(t, ·, y)` of the periodized kernel.
    pub fn density_column(&self, t: f64, y: f64) -> Result<TorusFunction> {
        let mut v = self.bank.apply_point_source(TimeKernel::Density(t), y);
        v.iter_mut().zip(self.correction_column(t, y)?.values).for_each(|(a, b)| *a += b);
        Ok(TorusFunction::new(self.torus().clone(), v))
    }

    /// Sample a function on the torus nodes.
    pub fn sample(&self, u: &dyn ScalarFunction) -> Vec<f64> {
        self.torus().nodes().iter().map(|&x| u.value(x)).collect()
    }

    /// Semigroup `t ↦ P_t u` for a grid vector.
    pub fn propagate(&self, u: Vec<f64>) -> Propagator {
        let sweep = self.sweep(&Source::Vector(u.clone()), Direction::Forward);
        Propagator { source: u, sweep }
    }

    /// Semigroup of a function sampled on the torus.
    pub fn propagate_fn(&self, u: &dyn ScalarFunction) -> Propagator {
        self.propagate(self.sample(u))
    }

    /// `P_t u` on the grid.
    pub fn semigroup_values(&self, prop: &Propagator, t: f64) -> Result<TorusFunction> {
        self.check_time(t)?;
        let mut v = self.bank.apply(TimeKernel::Density(t), &prop.source);
        let corr = self.correction_vector(&prop.sweep, t, &self.rule);
        v.iter_mut().zip(corr).for_each(|(a, b)| *a += b);
        Ok(TorusFunction::new(self.torus().clone(), v))
    }

    /// `P_t u(x)`.
    pub fn semigroup_apply(&self, u: &dyn ScalarFunction, t: f64, x: f64) -> Result<f64> {
        let prop = self.propagate_fn(u);
        Ok(self.semigroup_values(&prop, t)?.value(x))
    }

    /// `∫₀^T e^{−λt} P_t u dt`.
    fn discounted_integral(&self, prop: &Propagator, lambda: f64) -> Vec<f64> {
        let horizon = self.settings.horizon;
        let tau0 = self.settings.tau_min;
        let mut acc = self.bank.apply(TimeKernel::DiscountedDensityIntegral(lambda, horizon), &prop.source);
        let sweep = &prop.sweep;
        if sweep.terms.is_empty() {
            return acc;
        }
        let add = |acc: &mut Vec<f64>, v: Vec<f64>, w: f64| acc.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
        add(&mut acc, self.bank.apply(TimeKernel::DiscountedDensityIntegral(lambda, horizon), &sweep.head_total), 1.0);
        for (s, w) in self.log_nodes(&self.rule, tau0, horizon) {
            let g = self.lattice.weighted_at(&sweep.totals, s);
            let kernel = TimeKernel::DiscountedDensityIntegral(lambda, horizon - s);
            add(&mut acc, self.bank.apply(kernel, &g), w * (-lambda * s).exp());
        }
        acc
    }

    /// `R_λ u = ∫₀^∞ e^{−λt} P_t u dt` on the grid, extended past `T` by `P_{t} = P_T P_{t−T}`.
    pub fn resolvent(&self, u: &dyn ScalarFunction, lambda: f64) -> Result<TorusFunction> {
        self.resolvent_vec(self.sample(u), lambda)
    }

    pub fn resolvent_vec(&self, u: Vec<f64>, lambda: f64) -> Result<TorusFunction> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::Param(format!("λ = {lambda} must be positive")));
        }
        let s = &self.settings;
        let damp = (-lambda * s.horizon).exp();
        let steps_needed = (s.resolvent_tol.ln() / (-lambda * s.horizon)).ceil() as usize;
        if steps_needed > s.resolvent_max_steps {
            return Err(Error::Horizon(format!(
                "e^(−λT) = {damp:.3e} needs {steps_needed} compositions (limit {})",
                s.resolvent_max_steps
            )));
        }
        let prop = self.propagate(u);
        let mut term = self.discounted_integral(&prop, lambda);
        let mut total = term.clone();
        for _ in 0..steps_needed {
            let p = self.propagate(term);
            let next = self.semigroup_values(&p, s.horizon)?.values;
            term = next.iter().map(|v| damp * v).collect();
            total.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
        }
        Ok(TorusFunction::new(self.torus().clone(), total))
    }

    /// `R_λ u(x)`.
    pub fn resolvent_apply(&self, u: &dyn ScalarFunction, lambda: f64, x: f64) -> Result<f64> {
        Ok(self.resolvent(u, lambda)?.value(x))
    }

    /// `(f, g) = (R_λ h, λ f − h)`, so that the extended generator maps `f` to `g`.
    pub fn poisson_pair(&self, h: &dyn ScalarFunction, lambda: f64) -> Result<(TorusFunction, TorusFunction)> {
        let hv = self.sample(h);
        let f = self.resolvent_vec(hv.clone(), lambda)?;
        let g: Vec<f64> = f.values.iter().zip(&hv).map(|(a, b)| lambda * a - b).collect();
        Ok((f, TorusFunction::new(self.torus().clone(), g)))
    }

    /// `max_t t^{−1} max_x |P_t f(x) − f(x)|` over `t_grid` and `probes`.
    pub fn favard_functional(&self, f: &dyn ScalarFunction, t_grid: &[f64], probes: &[f64]) -> Result<FavardReport> {
        let prop = self.propagate_fn(f);
        let mut profile = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let pt = self.semigroup_values(&prop, t)?;
            let q = probes.iter().map(|&x| (pt.value(x) - f.value(x)).abs()).fold(0.0, f64::max) / t;
            profile.push((t, q));
        }
        let value = profile.iter().map(|p| p.1).fold(0.0, f64::max);
        let mut sorted = profile.clone();
        sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
        let monotone = sorted.windows(2).all(|w| w[1].1 > w[0].1);
        let growth = match (sorted.first(), sorted.last()) {
            (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
            _ => 1.0,
        };
        Ok(FavardReport { value, profile, diverging: monotone && growth > 2.0 })
    }

    /// Mass `∫ p(t, x, y) dy`: quadrature of `p₀` within distance `reach`, a Lévy-tail
    /// model beyond it, and the integrated correction.
    pub fn mass(&self, t: f64, x: f64, reach: f64) -> Result<MassReport> {
        self.check_time(t)?;
        let rule = gl16();
        let sym = self.symbol();
        let mut breaks = vec![0.0];
        let mut b = 0.01;
        while b < reach {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(reach);
        let mut p0_mass = 0.0;
        for w in breaks.windows(2) {
            for sign in [-1.0, 1.0] {
                p0_mass += rule.integrate(w[0], w[1], |d| {
                    let y = x + sign * d;
                    stable_pdf_1d(sym.order(y), t * sym.scale_at(y), -sign * d).unwrap_or(f64::NAN)
                });
            }
        }
        if !p0_mass.is_finite() {
            return Err(Error::Quadrature("density quadrature failed in mass integral".into()));
        }
        let tail_density = |d: f64, y: f64| {
            let a = sym.order(y);
            t * sym.scale_at(y) * levy_constant_closed_form(a, 1) * d.powf(-1.0 - a)
        };
        let mut tail_mass = 0.0;
        let far = 100.0 * reach;
        let mut lo = reach;
        while lo < far {
            let hi = (lo * 1.5).min(far);
            for sign in [-1.0, 1.0] {
                tail_mass += rule.integrate(lo, hi, |d| tail_density(d, x + sign * d));
            }
            lo = hi;
        }
        let a_lo = sym.alpha.alpha_low;
        let m_hi = sym.scale.as_ref().map_or(1.0, |s| s.high);
        tail_mass += 2.0 * t * m_hi * levy_constant_closed_form(a_lo, 1) / (a_lo * far.powf(a_lo));
        let correction_mass = if self.is_trivial() {
            0.0
        } else {
            let prop = self.ones_propagator();
            TorusFunction::new(self.torus().clone(), self.correction_vector(&prop.sweep, t, &self.rule)).value(x)
        };
        Ok(MassReport { p0_mass, tail_mass, correction_mass })
    }

    fn ones_propagator(&self) -> Arc<Propagator> {
        let mut guard = self.ones.lock().expect("propagator cache poisoned");
        if let Some(p) = guard.as_ref() {
            return p.clone();
        }
        let p = Arc::new(self.propagate(vec![1.0; self.torus().n]));
        *guard = Some(p.clone());
        p
    }
}

/// A source vector together with its series sweep.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub source: Vec<f64>,
    pub sweep: Sweep,
}

/// Outcome of [`ParametrixKernel::favard_functional`].
#[derive(Debug, Clone, PartialEq)]
pub struct FavardReport {
    pub value: f64,
    /// `(t, t^{−1} max_x |P_t f − f|)`.
    pub profile: Vec<(f64, f64)>,
    /// The profile increases monotonically by more than 2× as `t` decreases.
    pub diverging: bool,
}

/// `F(t,x,y) = (1/π)∫₀^∞ (q(y,ξ) − q(x,ξ)) e^{−t q(y,ξ)} cos(ξ(x−y)) dξ`.
pub fn kernel_f_value(sym: &Symbol, t: f64, x: f64, y: f64) -> Result<f64> {
    let (ry, my) = (sym.order(y), sym.scale_at(y));
    let (rx, mx) = (sym.order(x), sym.scale_at(x));
    if ry == rx && my == mx {
        return Ok(0.0);
    }
    let rate = t * my;
    let v = damped_cosine_transform(rate, ry, x - y, |xi| {
        let qy = my * xi.powf(ry);
        (qy - mx * xi.powf(rx)) * (-t * qy).exp()
    })?;
    Ok(v / std::f64::consts::PI)
}

/// Discretization of [`timespace_convolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionGrid {
    /// Half-width of the spatial box, centred at `(x + y)/2`.
    pub half_width: f64,
    /// Trapezoid points in space.
    pub space_points: usize,
    /// Gauss nodes on each half of `[0, t]`.
    pub time_nodes: usize,
    /// Grading exponent: `s = (t/2) v^κ` near both ends.
    pub grading: f64,
    /// Largest admissible tail estimate; `None` disables the check.
    pub tail_tol: Option<f64>,
}

impl Default for ConvolutionGrid {
    fn default() -> Self {
        Self { half_width: 8.0, space_points: 801, time_nodes: 16, grading: 2.0, tail_tol: Some(1e-3) }
    }
}

/// Graded nodes on `[0, t]` clustering at both ends, as `(s, weight)`.
pub fn graded_time_nodes(t: f64, nodes: usize, grading: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(nodes);
    let half = 0.5 * t;
    let mut out = Vec::with_capacity(2 * nodes);
    for (v, w) in rule.mapped(0.0, 1.0) {
        let s = half * v.powf(grading);
        let jac = half * grading * v.powf(grading - 1.0);
        out.push((s, w * jac));
        out.push((t - s, w * jac));
    }
    out
}

/// `∫₀^t ∫ f(t−s, x, z) g(s, z, y) dz ds`.
pub fn timespace_convolve<F, G>(f: F, g: G, t: f64, x: f64, y: f64, grid: &ConvolutionGrid) -> Result<f64>
where
    F: Fn(f64, f64, f64) -> f64,
    G: Fn(f64, f64, f64) -> f64,
{
    if grid.space_points < 2 {
        return Err(Error::Param("need at least two spatial points".into()));
    }
    let c = 0.5 * (x + y);
    let (lo, hi) = (c - grid.half_width, c + grid.half_width);
    let h = (hi - lo) / (grid.space_points - 1) as f64;
    let mut total = 0.0;
    let mut edge: f64 = 0.0;
    for (s, w) in graded_time_nodes(t, grid.time_nodes, grid.grading) {
        let mut inner = 0.0;
        for k in 0..grid.space_points {
            let z = lo + k as f64 * h;
            let v = f(t - s, x, z) * g(s, z, y);
            let wt = if k == 0 || k == grid.space_points - 1 { 0.5 } else { 1.0 };
            inner += wt * v;
            if k == 0 || k == grid.space_points - 1 {
                edge = edge.max(v.abs());
            }
        }
        total += w * h * inner;
    }
    if let Some(tol) = grid.tail_tol {
        let tail = t * edge * grid.half_width;
        if tail > tol {
            return Err(Error::Truncation(format!("tail estimate {tail:.3e} exceeds {tol:.1e}")));
        }
    }
    Ok(total)
}

/// `∫ f(x, z) g(z, y) dz` by the trapezoid rule on the box of `grid`.
pub fn spatial_convolve<F, G>(f: F, g: G, x: f64, y: f64, grid: &ConvolutionGrid) -> f64
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> f64,
{
    let c = 0.5 * (x + y);
    let (lo, hi) = (c - grid.half_width, c + grid.half_width);
    let h = (hi - lo) / (grid.space_points - 1) as f64;
    (0..grid.space_points)
        .map(|k| {
            let z = lo + k as f64 * h;
            let wt = if k == 0 || k == grid.space_points - 1 { 0.5 } else { 1.0 };
            wt * f(x, z) * g(z, y)
        })
        .sum::<f64>()
        * h
}
