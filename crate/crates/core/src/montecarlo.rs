//! Seeded simulation of stable drivers and stable-like processes, with the statistics
//! used to check semigroup, Dynkin, small-time and stopping identities.
//!
//! Every path draws from its own ChaCha8 stream (master seed, stream = path index), so
//! ensembles are bit-exact for a given seed regardless of the worker count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{AlphaField, ScaleField};
use crate::field::ls_slope;
use crate::grid::ScalarFunction;
use crate::quad::gl16;
use crate::stable::levy_constant_closed_form;

/// RNG for one path.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Standard symmetric `α`-stable variate with characteristic function `exp(−|ξ|^α)`.
pub fn standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = rng.sample(StandardNormal);
        return std::f64::consts::SQRT_2 * z;
    }
    let u = PI * (rng.random::<f64>() - 0.5);
    if alpha == 1.0 {
        return u.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (alpha * u).sin() / u.cos().powf(1.0 / alpha) * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Positive `β`-stable variate with Laplace transform `exp(−λ^β)`, `β ∈ (0, 1)`.
pub fn positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = PI * rng.random::<f64>();
    let w: f64 = rng.sample(Exp1);
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    a * (((1.0 - beta) * u).sin() / w).powf((1.0 - beta) / beta)
}

/// Increment over `dt` of the isotropic `α`-stable process with symbol `|ξ|^α` in `dim ∈ {1, 2}`.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Range { value: alpha, at: f64::NAN });
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Param(format!("time step {dt} must be positive")));
    }
    match dim {
        1 => Ok(vec![dt.powf(1.0 / alpha) * standard_stable(alpha, rng)]),
        2 => {
            let var = if alpha == 2.0 { 2.0 * dt } else { 2.0 * dt.powf(2.0 / alpha) * positive_stable(alpha / 2.0, rng) };
            let sd = var.sqrt();
            Ok((0..2).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
        }
        _ => Err(Error::Param(format!("dimension {dim} not supported"))),
    }
}

/// Construction behind an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Sde,
    TimeChange,
    Levy,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sde => "sde",
            Scheme::TimeChange => "timechange",
            Scheme::Levy => "levy",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sde" => Ok(Scheme::Sde),
            "timechange" => Ok(Scheme::TimeChange),
            "levy" => Ok(Scheme::Levy),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Simulated paths on the lattice `k·dt`, `k = 0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    pub x0: f64,
    pub steps: usize,
    /// Row-major `[path][step]`.
    pub positions: Vec<f64>,
    pub seed: u64,
    pub scheme: Scheme,
}

impl PathEnsemble {
    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.steps + 1;
        &self.positions[i * w..(i + 1) * w]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks(self.steps + 1)
    }

    /// Lattice index of time `t`.
    pub fn step_of(&self, t: f64) -> Result<usize> {
        let k = t / self.dt;
        let r = k.round();
        if (k - r).abs() > 1e-6 || r < 0.0 || r as usize > self.steps {
            return Err(Error::Param(format!("time {t} is not on the step lattice")));
        }
        Ok(r as usize)
    }

    /// Positions at time `t` across paths.
    pub fn at_time(&self, t: f64) -> Result<Vec<f64>> {
        let k = self.step_of(t)?;
        Ok(self.paths().map(|p| p[k]).collect())
    }
}

struct Run {
    n: usize,
    steps: usize,
    x0: f64,
    seed: u64,
}

fn validate_run(x0: f64, horizon: f64, dt: f64, n: usize) -> Result<usize> {
    if !(dt > 0.0 && horizon > 0.0 && x0.is_finite()) || n == 0 {
        return Err(Error::Param("need dt > 0, T > 0, finite start and at least one path".into()));
    }
    let steps = (horizon / dt).round();
    if (steps * dt - horizon).abs() > 1e-9 * horizon || steps < 1.0 {
        return Err(Error::Param(format!("T = {horizon} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

fn run<S>(r: &Run, step: S) -> Result<Vec<f64>>
where
    S: Fn(f64, &mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let w = r.steps + 1;
    let rows: Vec<Result<Vec<f64>>> = (0..r.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(r.seed, i as u64);
            let mut row = Vec::with_capacity(w);
            let mut x = r.x0;
            row.push(x);
            for _ in 0..r.steps {
                x = step(x, &mut rng)?;
                row.push(x);
            }
            Ok(row)
        })
        .collect();
    let mut out = Vec::with_capacity(r.n * w);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

/// Euler scheme for `dX = b(X)dt + σ(X−)dL` with a symmetric `α`-stable driver `L`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_sde<B, S>(b: B, sigma: S, alpha: f64, x0: f64, horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<PathEnsemble>
where
    B: Fn(f64) -> f64 + Sync,
    S: Fn(f64) -> f64 + Sync,
{
    let steps = validate_run(x0, horizon, dt, n_paths)?;
    AlphaField::constant(alpha)?;
    let scale = dt.powf(1.0 / alpha);
    let r = Run { n: n_paths, steps, x0, seed };
    let positions = run(&r, |x, rng| {
        let s = sigma(x);
        if s.is_nan() || s <= 0.0 {
            return Err(Error::Param(format!("σ({x}) = {s} is not positive")));
        }
        Ok(x + b(x) * dt + s * scale * standard_stable(alpha, rng))
    })?;
    Ok(PathEnsemble { n_paths, dt, horizon, x0, steps, positions, seed, scheme: Scheme::Sde })
}

/// Frozen-coefficient scheme for the time change with symbol `m(x)|ξ|^α`:
/// each step advances operational time by `m(X_k)·dt`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_timechange<M>(m: M, alpha: f64, x0: f64, horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<PathEnsemble>
where
    M: Fn(f64) -> f64 + Sync,
{
    let steps = validate_run(x0, horizon, dt, n_paths)?;
    AlphaField::constant(alpha)?;
    let r = Run { n: n_paths, steps, x0, seed };
    let positions = run(&r, |x, rng| {
        let mx = m(x);
        if !(mx > 0.0 && mx.is_finite()) {
            return Err(Error::Param(format!("time-change rate m({x}) = {mx} out of range")));
        }
        Ok(x + (mx * dt).powf(1.0 / alpha) * standard_stable(alpha, rng))
    })?;
    Ok(PathEnsemble { n_paths, dt, horizon, x0, steps, positions, seed, scheme: Scheme::TimeChange })
}

/// Frozen-coefficient scheme for the variable-order process: step `k` uses order `α(X_k)`.
pub fn simulate_levy(alpha: &AlphaField, x0: f64, horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    simulate_stable_like(alpha, None, x0, horizon, dt, n_paths, seed)
}

/// Frozen-coefficient scheme for the symbol `m(x)|ξ|^{α(x)}`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_stable_like(
    alpha: &AlphaField,
    scale: Option<&ScaleField>,
    x0: f64,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    let steps = validate_run(x0, horizon, dt, n_paths)?;
    let r = Run { n: n_paths, steps, x0, seed };
    let positions = run(&r, |x, rng| {
        let a = alpha.eval(x);
        let m = scale.map_or(1.0, |s| s.eval(x));
        Ok(x + (m * dt).powf(1.0 / a) * standard_stable(a, rng))
    })?;
    let scheme = if scale.is_some() { Scheme::TimeChange } else { Scheme::Levy };
    Ok(PathEnsemble { n_paths, dt, horizon, x0, steps, positions, seed, scheme })
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        if xs.len() < 2 {
            return Self { value: mean, stderr: 0.0 };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { value: mean, stderr: (var / n).sqrt() }
    }
}

/// `E f(X_t)` with its standard error.
pub fn empirical_semigroup(ensemble: &PathEnsemble, f: &dyn ScalarFunction, t: f64) -> Result<Estimate> {
    let xs: Vec<f64> = ensemble.at_time(t)?.into_iter().map(|x| f.value(x)).collect();
    Ok(Estimate::from_samples(&xs))
}

/// First exit of one path from `B(x₀, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitRecord {
    pub path: usize,
    /// Exit time, or the horizon if censored.
    pub tau: f64,
    /// Lattice index of the exit (or last index if censored).
    pub step: usize,
    /// `|X_τ − x₀| − r`; zero if censored.
    pub overshoot: f64,
    pub censored: bool,
}

/// Exit records of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitRecords {
    pub records: Vec<ExitRecord>,
    pub censored_fraction: f64,
}

/// First lattice time with `|X_k − x₀| > r`, paths never exiting censored at the horizon.
pub fn exit_time(ensemble: &PathEnsemble, x0: f64, r: f64) -> Result<ExitRecords> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Param(format!("radius {r} must be nonnegative")));
    }
    let records: Vec<ExitRecord> = ensemble
        .paths()
        .enumerate()
        .map(|(i, p)| match p.iter().position(|x| (x - x0).abs() > r) {
            Some(k) => ExitRecord { path: i, tau: k as f64 * ensemble.dt, step: k, overshoot: (p[k] - x0).abs() - r, censored: false },
            None => ExitRecord { path: i, tau: ensemble.horizon, step: ensemble.steps, overshoot: 0.0, censored: true },
        })
        .collect();
    let censored = records.iter().filter(|r| r.censored).count();
    let censored_fraction = censored as f64 / records.len().max(1) as f64;
    Ok(ExitRecords { records, censored_fraction })
}

/// Stopping rule for [`dynkin_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    FixedTime(f64),
    /// First exit from `B(x₀, r)`, capped at the ensemble horizon.
    Exit(f64),
}

fn stop_steps(ensemble: &PathEnsemble, rule: StopRule) -> Result<Vec<usize>> {
    match rule {
        StopRule::FixedTime(t) => Ok(vec![ensemble.step_of(t)?; ensemble.n_paths]),
        StopRule::Exit(r) => Ok(exit_time(ensemble, ensemble.x0, r)?.records.iter().map(|e| e.step).collect()),
    }
}

/// `mean[f(X_τ) − f(x₀) − ∫₀^τ g(X_s) ds]` with the time integral as a left-point step sum.
pub fn dynkin_residual(ensemble: &PathEnsemble, f: &dyn ScalarFunction, g: &dyn ScalarFunction, rule: StopRule) -> Result<Estimate> {
    let stops = stop_steps(ensemble, rule)?;
    let f0 = f.value(ensemble.x0);
    let per_path: Vec<f64> = ensemble
        .paths()
        .zip(&stops)
        .map(|(p, &k)| {
            let integral: f64 = p[..k].iter().map(|&x| g.value(x)).sum::<f64>() * ensemble.dt;
            f.value(p[k]) - f0 - integral
        })
        .collect();
    Ok(Estimate::from_samples(&per_path))
}

/// Position of each path at `min(t, τ_r)`.
pub fn stopped_positions(ensemble: &PathEnsemble, x: f64, r: f64, t: f64) -> Result<Vec<f64>> {
    let k = ensemble.step_of(t)?;
    Ok(ensemble
        .paths()
        .map(|p| match p[..=k].iter().position(|y| (y - x).abs() > r) {
            Some(j) => p[j],
            None => p[k],
        })
        .collect())
}

/// `∫ φ(y) c_{α(x)} |y|^{−1−α(x)} dy` by quadrature, `φ` vanishing on `|y| < inner`.
pub fn levy_measure_integral(phi: &dyn ScalarFunction, alpha_x: f64, inner: f64, outer: f64) -> f64 {
    let c = levy_constant_closed_form(alpha_x, 1);
    let rule = gl16();
    let mut total = 0.0;
    let mut lo = inner;
    while lo < outer {
        let hi = (lo * 1.25).min(outer).max(lo + 1e-3);
        total += rule.integrate(lo, hi, |y| (phi.value(y) + phi.value(-y)) * y.powf(-1.0 - alpha_x));
        lo = hi;
    }
    c * total
}

/// Small-time estimate `t^{−1} E φ(X_{t∧τ} − x)` and its quadrature target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallTimeReport {
    pub estimate: Estimate,
    pub target: f64,
}

/// Settings of [`smalltime_levy_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallTimeSettings {
    pub steps: usize,
    pub exit_radius: f64,
    /// `φ` vanishes on `|y| < support_inner`; the target integral runs to `support_outer`
    /// plus an analytic tail where `φ ≡ φ(support_outer)`.
    pub support_inner: f64,
    pub support_outer: f64,
    pub seed: u64,
}

/// `t^{−1} E φ(X_{t∧τ} − x)` over `n` fresh paths started at `x`.
pub fn smalltime_levy_estimate(
    x: f64,
    phi: &dyn ScalarFunction,
    t: f64,
    n: usize,
    alpha: &AlphaField,
    settings: &SmallTimeSettings,
) -> Result<SmallTimeReport> {
    let dt = t / settings.steps.max(1) as f64;
    let ens = simulate_levy(alpha, x, t, dt, n, settings.seed)?;
    let stopped = stopped_positions(&ens, x, settings.exit_radius, t)?;
    let vals: Vec<f64> = stopped.iter().map(|&y| phi.value(y - x) / t).collect();
    let a = alpha.eval(x);
    let body = levy_measure_integral(phi, a, settings.support_inner, settings.support_outer);
    let far = (phi.value(settings.support_outer) + phi.value(-settings.support_outer)) * levy_constant_closed_form(a, 1)
        * settings.support_outer.powf(-a)
        / a;
    Ok(SmallTimeReport { estimate: Estimate::from_samples(&vals), target: body + far })
}

/// Exit probabilities `P(sup_{s≤t} |X_s − x| > r)` and their log–log slope in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalReport {
    /// `(t, probability, stderr)`.
    pub profile: Vec<(f64, f64, f64)>,
    /// `None` when some probability is zero.
    pub slope: Option<f64>,
}

/// Empirical maximal-inequality profile over a geometric `t_grid ⊂ (0, 0.1]`.
#[allow(clippy::too_many_arguments)]
pub fn maximal_inequality_check(
    x: f64,
    r: f64,
    t_grid: &[f64],
    n: usize,
    alpha: &AlphaField,
    dt: f64,
    seed: u64,
) -> Result<MaximalReport> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    if t_grid.is_empty() || t_max > 0.1 + 1e-12 || t_grid.iter().any(|&t| t <= 0.0) {
        return Err(Error::Param("t grid must lie in (0, 0.1]".into()));
    }
    let horizon = (t_max / dt).ceil() * dt;
    let ens = simulate_levy(alpha, x, horizon, dt, n, seed)?;
    let exits = exit_time(&ens, x, r)?;
    let profile: Vec<(f64, f64, f64)> = t_grid
        .iter()
        .map(|&t| {
            let hits: Vec<f64> = exits.records.iter().map(|e| if !e.censored && e.tau <= t + 1e-12 { 1.0 } else { 0.0 }).collect();
            let est = Estimate::from_samples(&hits);
            (t, est.value, est.stderr)
        })
        .collect();
    let slope = if profile.iter().all(|p| p.1 > 0.0) && profile.len() >= 2 {
        Some(ls_slope(&profile.iter().map(|p| (p.0.ln(), p.1.ln())).collect::<Vec<_>>()))
    } else {
        None
    };
    Ok(MaximalReport { profile, slope })
}

/// `E[|X_{t∧τ_r} − x|^β ∧ 1]` for each `t` of `t_grid` from one ensemble.
#[allow(clippy::too_many_arguments)]
pub fn stopped_moment(
    x: f64,
    r: f64,
    beta: f64,
    t_grid: &[f64],
    n: usize,
    alpha: &AlphaField,
    dt: f64,
    seed: u64,
) -> Result<Vec<(f64, Estimate)>> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(Error::Param(format!("β = {beta} must lie in (1, 2)")));
    }
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let ens = simulate_levy(alpha, x, t_max, dt, n, seed)?;
    t_grid
        .iter()
        .map(|&t| {
            let ys = stopped_positions(&ens, x, r, t)?;
            let vals: Vec<f64> = ys.iter().map(|y| (y - x).abs().powf(beta).min(1.0)).collect();
            Ok((t, Estimate::from_samples(&vals)))
        })
        .collect()
}

/// Stopped Favard functional `K̂_r(f)` and its `t`-profile.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppedFavard {
    pub value: f64,
    /// Standard error of `t^{−1}(mean − f(x))` at the maximizing `(t, x)`.
    pub stderr: f64,
    /// `(t, max_x t^{−1}|E f(X_{t∧τ}) − f(x)|)`.
    pub profile: Vec<(f64, f64)>,
    /// Profile increases monotonically by more than 2× as `t` decreases.
    pub diverging: bool,
}

/// `max_{t, x} t^{−1}|E f(X_{t∧τ_r^x}) − f(x)|`.
#[allow(clippy::too_many_arguments)]
pub fn stopped_favard(
    f: &dyn ScalarFunction,
    r: f64,
    t_grid: &[f64],
    probes: &[f64],
    n: usize,
    alpha: &AlphaField,
    dt: f64,
    seed: u64,
) -> Result<StoppedFavard> {
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let mut best = vec![(0.0f64, 0.0f64); t_grid.len()];
    for (j, &x) in probes.iter().enumerate() {
        let ens = simulate_levy(alpha, x, t_max, dt, n, seed.wrapping_add(j as u64))?;
        let fx = f.value(x);
        for (b, &t) in best.iter_mut().zip(t_grid) {
            let ys = stopped_positions(&ens, x, r, t)?;
            let vals: Vec<f64> = ys.iter().map(|&y| (f.value(y) - fx) / t).collect();
            let est = Estimate::from_samples(&vals);
            if est.value.abs() > b.0 {
                *b = (est.value.abs(), est.stderr);
            }
        }
    }
    let profile: Vec<(f64, f64)> = t_grid.iter().copied().zip(best.iter().map(|b| b.0)).collect();
    let (value, stderr) = best.iter().copied().fold((0.0, 0.0), |acc, b| if b.0 > acc.0 { b } else { acc });
    let mut sorted = profile.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let monotone = sorted.windows(2).all(|w| w[1].1 > w[0].1);
    let growth = match (sorted.first(), sorted.last()) {
        (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
        _ => 1.0,
    };
    Ok(StoppedFavard { value, stderr, profile, diverging: monotone && growth > 2.0 })
}

/// Kolmogorov–Smirnov distance of samples to a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Tabulated CDF for fast KS checks: linear interpolation on `[lo, hi]`, 0/1 outside.
pub fn tabulate_cdf(cdf: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, points: usize) -> Result<impl Fn(f64) -> f64> {
    let xs: Vec<f64> = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    let vs = xs.iter().map(|&x| cdf(x)).collect::<Result<Vec<f64>>>()?;
    Ok(move |x: f64| {
        if x <= lo {
            return vs[0];
        }
        if x >= hi {
            return vs[vs.len() - 1];
        }
        crate::field::linear_interp(&xs, &vs, x)
    })
}
