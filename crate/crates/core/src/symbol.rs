//! Symbols `q(x, ξ) = m(x)|ξ|^{α(x)}`.

use crate::error::Result;
use crate::field::{make_alpha_field, AlphaField, AlphaSpec, ScaleField};

/// Stable-like symbol with variable order and optional variable scale.
#[derive(Debug, Clone)]
pub struct Symbol {
    pub alpha: AlphaField,
    pub scale: Option<ScaleField>,
}

impl Symbol {
    /// `|ξ|^{α(x)}`.
    pub fn new(alpha: AlphaField) -> Self {
        Self { alpha, scale: None }
    }

    /// `m(x)|ξ|^{α(x)}`.
    pub fn with_scale(alpha: AlphaField, scale: ScaleField) -> Self {
        Self { alpha, scale: Some(scale) }
    }

    /// Symbol of `dX = σ(X-) dL` with `L` symmetric `α`-stable: `|σ(x)|^α |ξ|^α`.
    pub fn for_sde<F>(alpha: f64, sigma: F, sigma_low: f64, sigma_high: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let field = AlphaField::constant(alpha)?;
        let scale = ScaleField::from_fn(
            move |x| sigma(x).abs().powf(alpha),
            sigma_low.powf(alpha),
            sigma_high.powf(alpha),
            (-20.0, 20.0),
        )?;
        Ok(Self::with_scale(field, scale))
    }

    #[inline]
    pub fn order(&self, x: f64) -> f64 {
        self.alpha.eval(x)
    }

    #[inline]
    pub fn scale_at(&self, x: f64) -> f64 {
        self.scale.as_ref().map_or(1.0, |s| s.eval(x))
    }

    #[inline]
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        self.scale_at(x) * xi.abs().powf(self.order(x))
    }

    /// Copy whose coefficients are `2L`-periodic: unchanged on `[−L+b, L−b]`, blended
    /// smoothly across the seam at `±L` inside bands of width `b`.
    pub fn periodized(&self, half_width: f64, band: f64) -> Result<Self> {
        let (l, b) = (half_width, band);
        let alpha = match self.alpha.is_constant() {
            true => self.alpha.clone(),
            false => {
                let a = self.alpha.clone();
                make_alpha_field(&AlphaSpec::closure(move |x| seam_blend(|y| a.eval(y), l, b, x), (-l, l)))?
            }
        };
        let scale = match &self.scale {
            Some(s) if s.constant_value().is_none() => {
                let m = s.clone();
                Some(ScaleField::from_fn(move |x| seam_blend(|y| m.eval(y), l, b, x), s.low, s.high, (-l, l))?)
            }
            other => other.clone(),
        };
        Ok(Self { alpha, scale })
    }

    /// True when the symbol does not depend on `x`.
    pub fn is_spatially_constant(&self) -> bool {
        self.alpha.is_constant() && self.scale.as_ref().is_none_or(|s| s.constant_value().is_some())
    }
}

/// `f` on `[−L+b, L−b]`, C¹ blend between `f(L−b)` and `f(−L+b)` across the seam at `±L`.
fn seam_blend(f: impl Fn(f64) -> f64, l: f64, b: f64, x: f64) -> f64 {
    let x = if (-l..l).contains(&x) { x } else { (x + l).rem_euclid(2.0 * l) - l };
    let s = if x > l - b {
        (x - (l - b)) / (2.0 * b)
    } else if x < -l + b {
        (x + l + b) / (2.0 * b)
    } else {
        return f(x);
    };
    let w = s * s * (3.0 - 2.0 * s);
    (1.0 - w) * f(l - b) + w * f(-l + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodized_symbol_matches_inside_and_wraps() {
        let sym = Symbol::new(make_alpha_field(&AlphaSpec::default_sine()).unwrap());
        let p = sym.periodized(8.0, 2.0).unwrap();
        for x in [-5.9, 0.0, 3.3, 6.0] {
            assert_eq!(p.order(x), sym.order(x));
        }
        assert!((p.order(7.999999) - p.order(-8.0)).abs() < 1e-5);
        assert!((p.order(8.0) - p.order(-8.0)).abs() < 1e-12);
        let c = Symbol::new(AlphaField::constant(1.2).unwrap()).periodized(8.0, 2.0).unwrap();
        assert!(c.is_spatially_constant());
    }
}
