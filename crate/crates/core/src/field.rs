//! Order fields `x ↦ α(x)` and positive coefficient fields.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How an order field was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Constant,
    ClosedForm,
    GridInterpolated,
}

/// Description accepted by [`make_alpha_field`].
#[derive(Clone)]
pub enum AlphaSpec {
    Constant(f64),
    /// `offset + amplitude·sin(freq·x)`.
    Sine { offset: f64, amplitude: f64, freq: f64 },
    /// Arbitrary closure, sampled on `window` for its range and regularity.
    Closure { f: ScalarFn, window: (f64, f64) },
    /// Piecewise-linear through `(xs, values)`, clamped outside.
    Samples { xs: Vec<f64>, values: Vec<f64> },
}

impl AlphaSpec {
    pub fn closure<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, window: (f64, f64)) -> Self {
        AlphaSpec::Closure { f: Arc::new(f), window }
    }

    /// The reference field `1.5 + 0.3 sin x`.
    pub fn default_sine() -> Self {
        AlphaSpec::Sine { offset: 1.5, amplitude: 0.3, freq: 1.0 }
    }
}

impl fmt::Debug for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Constant(c) => write!(f, "Constant({c})"),
            AlphaSpec::Sine { offset, amplitude, freq } => {
                write!(f, "Sine({offset}+{amplitude}·sin({freq}x))")
            }
            AlphaSpec::Closure { window, .. } => write!(f, "Closure(window={window:?})"),
            AlphaSpec::Samples { xs, .. } => write!(f, "Samples(n={})", xs.len()),
        }
    }
}

/// Order function with range and Hölder metadata.
#[derive(Clone)]
pub struct AlphaField {
    eval: ScalarFn,
    pub alpha_low: f64,
    pub alpha_high: f64,
    pub holder_gamma: f64,
    pub holder_const: f64,
    pub kind: FieldKind,
    constant: Option<f64>,
}

impl fmt::Debug for AlphaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlphaField")
            .field("kind", &self.kind)
            .field("alpha_low", &self.alpha_low)
            .field("alpha_high", &self.alpha_high)
            .field("holder_gamma", &self.holder_gamma)
            .field("holder_const", &self.holder_const)
            .finish()
    }
}

impl AlphaField {
    pub fn constant(c: f64) -> Result<Self> {
        make_alpha_field(&AlphaSpec::Constant(c))
    }

    /// Order at `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let a = (self.eval)(x);
        debug_assert!(a > 0.0 && a <= 2.0, "order {a} at {x} outside (0,2]");
        a
    }

    /// Order at `x`, failing if the range invariant is violated.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        let a = (self.eval)(x);
        if a.is_finite() && a > 0.0 && a < 2.0 {
            Ok(a)
        } else {
            Err(Error::Range { value: a, at: x })
        }
    }

    /// Order at a point of ℝ^d; the field depends on the first coordinate.
    pub fn eval_point(&self, x: &[f64]) -> f64 {
        self.eval(x[0])
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.constant.is_some()
    }
}

/// Build an [`AlphaField`] and compute its metadata.
pub fn make_alpha_field(spec: &AlphaSpec) -> Result<AlphaField> {
    match spec {
        AlphaSpec::Constant(c) => {
            check_value(*c, 0.0)?;
            let c = *c;
            Ok(AlphaField {
                eval: Arc::new(move |_| c),
                alpha_low: c,
                alpha_high: c,
                holder_gamma: 1.0,
                holder_const: 0.0,
                kind: FieldKind::Constant,
                constant: Some(c),
            })
        }
        AlphaSpec::Sine { offset, amplitude, freq } => {
            let (o, a, k) = (*offset, *amplitude, *freq);
            let (lo, hi) = (o - a.abs(), o + a.abs());
            check_value(lo, 0.0)?;
            check_value(hi, 0.0)?;
            Ok(AlphaField {
                eval: Arc::new(move |x| o + a * (k * x).sin()),
                alpha_low: lo,
                alpha_high: hi,
                holder_gamma: 1.0,
                holder_const: (a * k).abs(),
                kind: if a == 0.0 { FieldKind::Constant } else { FieldKind::ClosedForm },
                constant: (a == 0.0 || k == 0.0).then_some(o),
            })
        }
        AlphaSpec::Closure { f, window } => {
            let (xs, vals) = dense_samples(|x| f(x), *window, 4001);
            for (x, v) in xs.iter().zip(&vals) {
                check_value(*v, *x)?;
            }
            from_samples(f.clone(), &xs, &vals, FieldKind::ClosedForm)
        }
        AlphaSpec::Samples { xs, values } => {
            if xs.len() < 2 || xs.len() != values.len() || xs.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Grid("order samples need ≥2 strictly increasing nodes".into()));
            }
            for (x, v) in xs.iter().zip(values) {
                check_value(*v, *x)?;
            }
            let (gx, gv) = (xs.clone(), values.clone());
            let f: ScalarFn = Arc::new(move |x| linear_interp(&gx, &gv, x));
            let (sx, sv) = dense_samples(|x| f(x), (xs[0], xs[xs.len() - 1]), 4001);
            from_samples(f, &sx, &sv, FieldKind::GridInterpolated)
        }
    }
}

fn check_value(v: f64, at: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=2.0).contains(&v) {
        return Err(Error::Range { value: v, at });
    }
    if v == 0.0 {
        return Err(Error::Degenerate(format!("order vanishes at x={at}")));
    }
    Ok(())
}

fn dense_samples<F: Fn(f64) -> f64>(f: F, (a, b): (f64, f64), n: usize) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let vs = xs.iter().map(|&x| f(x)).collect();
    (xs, vs)
}

fn from_samples(f: ScalarFn, xs: &[f64], vals: &[f64], kind: FieldKind) -> Result<AlphaField> {
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (gamma, constant) = estimate_holder(xs, vals);
    let is_const = hi - lo == 0.0;
    Ok(AlphaField {
        eval: f,
        alpha_low: lo,
        alpha_high: hi,
        holder_gamma: gamma,
        holder_const: constant,
        kind: if is_const { FieldKind::Constant } else { kind },
        constant: is_const.then_some(lo),
    })
}

/// Piecewise-linear interpolation clamped to the end values.
pub fn linear_interp(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return vs[0];
    }
    if x >= xs[n - 1] {
        return vs[n - 1];
    }
    let i = xs.partition_point(|&p| p <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    vs[i] * (1.0 - w) + vs[i + 1] * w
}

/// Empirical Hölder exponent (log-log slope of the modulus of continuity, capped to (0,1])
/// and the matching constant, both from a uniform sample.
pub fn estimate_holder(xs: &[f64], vals: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let lags: Vec<usize> = [1usize, 2, 4, 8, 16, 32].into_iter().filter(|&l| l < n).collect();
    let pts: Vec<(f64, f64)> = lags
        .iter()
        .filter_map(|&l| {
            let w = (0..n - l).map(|i| (vals[i + l] - vals[i]).abs()).fold(0.0, f64::max);
            (w > 0.0).then(|| ((l as f64 * dx).ln(), w.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return (1.0, 0.0);
    }
    let gamma = ls_slope(&pts).clamp(1e-3, 1.0);
    let mut c: f64 = 0.0;
    let stride = (n / 600).max(1);
    for i in (0..n).step_by(stride) {
        for j in (i + 1..n).step_by(stride) {
            let q = (vals[j] - vals[i]).abs() / (xs[j] - xs[i]).powf(gamma);
            c = c.max(q);
        }
    }
    (gamma, c)
}

/// Least-squares slope of `(x, y)` pairs.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Outcome of [`validate_alpha`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub pass: bool,
    pub reasons: Vec<String>,
    pub alpha_low: f64,
    pub alpha_high: f64,
    /// Sampled Hölder constant for the recorded exponent (a lower bound).
    pub empirical_holder_const: f64,
    pub holder_gamma: f64,
}

/// Check `0 < α_L ≤ sup α < 2` and report the empirical Hölder constant.
pub fn validate_alpha(field: &AlphaField) -> AdmissibilityReport {
    let mut reasons = Vec::new();
    if field.alpha_low <= 0.0 {
        reasons.push("alpha_low not > 0".to_string());
    }
    if field.alpha_high >= 2.0 {
        reasons.push("alpha_high not < 2".to_string());
    }
    if field.alpha_low > field.alpha_high {
        reasons.push("alpha_low exceeds alpha_high".to_string());
    }
    let (xs, vs) = dense_samples(|x| (field.eval)(x), (-2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI), 2001);
    let mut c: f64 = 0.0;
    for i in (0..xs.len()).step_by(4) {
        for j in (i + 1..xs.len()).step_by(4) {
            c = c.max((vs[j] - vs[i]).abs() / (xs[j] - xs[i]).powf(field.holder_gamma));
        }
    }
    AdmissibilityReport {
        pass: reasons.is_empty(),
        reasons,
        alpha_low: field.alpha_low,
        alpha_high: field.alpha_high,
        empirical_holder_const: c,
        holder_gamma: field.holder_gamma,
    }
}

/// Strictly positive coefficient field, used for `m(x)` in symbols `m(x)|ξ|^{α(x)}`.
#[derive(Clone)]
pub struct ScaleField {
    eval: ScalarFn,
    pub low: f64,
    pub high: f64,
    constant: Option<f64>,
}

impl fmt::Debug for ScaleField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScaleField[{}, {}]", self.low, self.high)
    }
}

impl ScaleField {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Param(format!("scale {c} must be positive")));
        }
        Ok(Self { eval: Arc::new(move |_| c), low: c, high: c, constant: Some(c) })
    }

    /// Closure with known bounds `[low, high]`, checked on a sample of `window`.
    pub fn from_fn<F>(f: F, low: f64, high: f64, window: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(low > 0.0 && high >= low) {
            return Err(Error::Param("scale bounds must satisfy 0 < low ≤ high".into()));
        }
        let (xs, vs) = dense_samples(&f, window, 2001);
        for (x, v) in xs.iter().zip(&vs) {
            if !(*v >= low * (1.0 - 1e-12) && *v <= high * (1.0 + 1e-12)) {
                return Err(Error::Param(format!("scale {v} at {x} outside [{low}, {high}]")));
            }
        }
        Ok(Self { eval: Arc::new(f), low, high, constant: (low == high).then_some(low) })
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field() {
        let f = AlphaField::constant(1.5).unwrap();
        assert_eq!((f.alpha_low, f.alpha_high), (1.5, 1.5));
        assert!(validate_alpha(&f).pass);
    }

    #[test]
    fn sine_field_range() {
        let f = make_alpha_field(&AlphaSpec::default_sine()).unwrap();
        assert!((f.alpha_low - 1.2).abs() < 1e-15 && (f.alpha_high - 1.8).abs() < 1e-15);
        let r = validate_alpha(&f);
        assert!(r.pass);
        assert!(r.empirical_holder_const <= 0.3 + 1e-9);
    }

    #[test]
    fn boundary_field_fails_validation() {
        let f = make_alpha_field(&AlphaSpec::closure(|x: f64| 2.0 - (-x * x).exp(), (-10.0, 10.0))).unwrap();
        let r = validate_alpha(&f);
        assert!(!r.pass);
        assert!(r.reasons.iter().any(|s| s == "alpha_high not < 2"));
    }

    #[test]
    fn range_errors() {
        assert!(matches!(AlphaField::constant(2.5), Err(Error::Range { .. })));
        assert!(matches!(AlphaField::constant(0.0), Err(Error::Degenerate(_))));
        assert!(!validate_alpha(&AlphaField::constant(2.0).unwrap()).pass);
    }

    #[test]
    fn clipped_abs_samples_are_lipschitz() {
        let xs: Vec<f64> = (0..401).map(|i| -2.0 + 4.0 * i as f64 / 400.0).collect();
        let vs: Vec<f64> = xs.iter().map(|x| x.abs().clamp(0.5, 1.9)).collect();
        let f = make_alpha_field(&AlphaSpec::Samples { xs: xs.clone(), values: vs.clone() }).unwrap();
        assert!((f.holder_gamma - 1.0).abs() <= 0.1, "gamma {}", f.holder_gamma);
        // brute-force pairwise quotient maximum
        let mut c: f64 = 0.0;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                c = c.max((vs[j] - vs[i]).abs() / (xs[j] - xs[i]));
            }
        }
        assert!((f.holder_const - c).abs() <= 0.1 * c);
        assert_eq!(f.kind, FieldKind::GridInterpolated);
        assert_eq!(f.eval(10.0), 1.9);
    }
}
