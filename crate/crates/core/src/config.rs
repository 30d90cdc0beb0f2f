//! Plain-text experiment configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. Recognised keys:
//!
//! | key | value |
//! |-----|-------|
//! | `alpha.kind` | `constant`, `sine` or `samples` |
//! | `alpha.params` | `c` / `offset, amplitude, freq` / `x0:v0, x1:v1, …` |
//! | `grid.lo`, `grid.hi`, `grid.n` | sampling grid for Hölder and interpolation checks |
//! | `time.points` | comma-separated, strictly increasing, within `(0, time.horizon]` |
//! | `time.horizon` | kernel horizon |
//! | `probes` | comma-separated probe positions |
//! | `lambda` | resolvent rate |
//! | `tol.<name>` | tolerance override, see [`TOLERANCE_DEFAULTS`] |
//! | `mc.paths`, `mc.dt`, `mc.smalltime_paths` | Monte Carlo sizes |
//! | `seed` | master RNG seed |
//! | `out.dir` | output directory |
//!
//! Every key can be overridden by an environment variable named
//! `VARORDER_` followed by the key upper-cased with dots replaced by
//! underscores, e.g. `VARORDER_TOL_MASS` or `VARORDER_SEED`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::{make_alpha_field, AlphaField, AlphaSpec};
use crate::grid::Grid;

/// Prefix of environment overrides.
pub const ENV_PREFIX: &str = "VARORDER_";

/// Tolerance names with their default values.
pub const TOLERANCE_DEFAULTS: &[(&str, f64)] = &[
    ("closed_form", 1e-6),
    ("self_similarity", 1e-8),
    ("degeneracy", 1e-10),
    ("mass", 1e-2),
    ("phi_rate", 0.05),
    ("holder_margin", 0.2),
    ("prefactor_slope", 0.15),
    ("schauder_bounded", 0.15),
    ("schauder_holder", 0.25),
    ("rhs_order", 0.15),
    ("generator", 5e-2),
    ("symbol", 1e-3),
    ("carre_du_champ", 5e-2),
    ("mc_sigmas", 3.0),
    ("mc_bias", 1.0),
    ("dynkin", 0.02),
    ("smalltime", 0.1),
    ("mixed_difference", 4.0),
    ("extrapolation", 1e-3),
];

/// Parsed and validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub alpha: AlphaSpec,
    pub grid: Grid,
    pub time_points: Vec<f64>,
    pub horizon: f64,
    pub probes: Vec<f64>,
    pub lambda: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub mc_paths: usize,
    pub mc_dt: f64,
    pub smalltime_paths: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: AlphaSpec::default_sine(),
            grid: Grid::line(-2.0, 2.0, 401).expect("valid default grid"),
            time_points: vec![0.05, 0.1, 0.2, 0.5],
            horizon: 1.0,
            probes: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            lambda: 5.0,
            tolerances: TOLERANCE_DEFAULTS.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            mc_paths: 100_000,
            mc_dt: 1e-3,
            smalltime_paths: 1_000_000,
            seed: 20240917,
            out_dir: PathBuf::from("out"),
        }
    }
}

const KEYS: &[&str] = &[
    "alpha.kind",
    "alpha.params",
    "grid.lo",
    "grid.hi",
    "grid.n",
    "time.points",
    "time.horizon",
    "probes",
    "lambda",
    "mc.paths",
    "mc.dt",
    "mc.smalltime_paths",
    "seed",
    "out.dir",
];

impl ExperimentConfig {
    /// Read a config file and apply environment overrides.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse_with_env(&text, |k| std::env::var(k).ok())
    }

    /// Parse config text without consulting the environment.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_env(text, |_| None)
    }

    /// Parse config text, then apply overrides looked up through `env`.
    pub fn parse_with_env(text: &str, env: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = k.trim().to_string();
            if !is_known(&key) {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
            }
            entries.insert(key, v.trim().to_string());
        }
        let tol_keys = TOLERANCE_DEFAULTS.iter().map(|(k, _)| format!("tol.{k}"));
        for key in KEYS.iter().map(|k| k.to_string()).chain(tol_keys) {
            if let Some(v) = env(&env_name(&key)) {
                entries.insert(key, v.trim().to_string());
            }
        }
        Self::from_entries(&entries)
    }

    fn from_entries(e: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(kind) = e.get("alpha.kind") {
            let params = e.get("alpha.params").map(String::as_str).unwrap_or("");
            cfg.alpha = parse_alpha(kind, params)?;
        } else if e.contains_key("alpha.params") {
            return Err(Error::Config("alpha.params given without alpha.kind".into()));
        }
        let lo = e.get("grid.lo").map(|v| num(v, "grid.lo")).transpose()?.unwrap_or(cfg.grid.lo);
        let hi = e.get("grid.hi").map(|v| num(v, "grid.hi")).transpose()?.unwrap_or(cfg.grid.hi);
        let n = e.get("grid.n").map(|v| int(v, "grid.n")).transpose()?.unwrap_or(cfg.grid.n);
        cfg.grid = Grid::line(lo, hi, n).map_err(|err| Error::Config(err.to_string()))?;
        if let Some(v) = e.get("time.points") {
            cfg.time_points = list(v, "time.points")?;
        }
        if let Some(v) = e.get("time.horizon") {
            cfg.horizon = num(v, "time.horizon")?;
        }
        if let Some(v) = e.get("probes") {
            cfg.probes = list(v, "probes")?;
        }
        if let Some(v) = e.get("lambda") {
            cfg.lambda = num(v, "lambda")?;
        }
        if let Some(v) = e.get("mc.paths") {
            cfg.mc_paths = int(v, "mc.paths")?;
        }
        if let Some(v) = e.get("mc.dt") {
            cfg.mc_dt = num(v, "mc.dt")?;
        }
        if let Some(v) = e.get("mc.smalltime_paths") {
            cfg.smalltime_paths = int(v, "mc.smalltime_paths")?;
        }
        if let Some(v) = e.get("seed") {
            cfg.seed = v.parse().map_err(|_| Error::Config(format!("seed: '{v}' is not an unsigned integer")))?;
        }
        if let Some(v) = e.get("out.dir") {
            cfg.out_dir = PathBuf::from(v);
        }
        for (k, v) in e {
            if let Some(name) = k.strip_prefix("tol.") {
                cfg.tolerances.insert(name.to_string(), num(v, k)?);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Check the schema invariants.
    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Config(format!("tol.{k} must be positive, got {v}")));
            }
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config("time.horizon must be positive".into()));
        }
        if self.time_points.is_empty() {
            return Err(Error::Config("time.points is empty".into()));
        }
        if self.time_points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("time.points must be strictly increasing".into()));
        }
        if self.time_points[0] <= 0.0 || *self.time_points.last().unwrap() > self.horizon {
            return Err(Error::Config(format!("time.points must lie in (0, {}]", self.horizon)));
        }
        if self.probes.is_empty() {
            return Err(Error::Config("probes is empty".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        if self.mc_paths < 2 || self.smalltime_paths < 2 {
            return Err(Error::Config("Monte Carlo path counts must be at least 2".into()));
        }
        if !(self.mc_dt > 0.0 && self.mc_dt < self.horizon) {
            return Err(Error::Config("mc.dt must lie in (0, time.horizon)".into()));
        }
        make_alpha_field(&self.alpha).map_err(|e| Error::Config(format!("alpha: {e}")))?;
        Ok(())
    }

    /// Tolerance by name; names are checked at parse time.
    pub fn tol(&self, name: &str) -> f64 {
        *self
            .tolerances
            .get(name)
            .unwrap_or_else(|| panic!("no tolerance named '{name}'"))
    }

    /// The order field described by `alpha.*`.
    pub fn alpha_field(&self) -> Result<AlphaField> {
        make_alpha_field(&self.alpha)
    }

    /// Key/value lines echoing the effective configuration.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = vec![
            ("alpha".to_string(), format!("{:?}", self.alpha)),
            ("grid".to_string(), format!("[{}, {}] n={}", self.grid.lo, self.grid.hi, self.grid.n)),
            ("time.points".to_string(), join(&self.time_points)),
            ("time.horizon".to_string(), self.horizon.to_string()),
            ("probes".to_string(), join(&self.probes)),
            ("lambda".to_string(), self.lambda.to_string()),
            ("mc.paths".to_string(), self.mc_paths.to_string()),
            ("mc.dt".to_string(), self.mc_dt.to_string()),
            ("mc.smalltime_paths".to_string(), self.smalltime_paths.to_string()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        out.extend(self.tolerances.iter().map(|(k, v)| (format!("tol.{k}"), v.to_string())));
        out
    }
}

/// Environment variable name overriding `key`.
pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

fn is_known(key: &str) -> bool {
    KEYS.contains(&key)
        || key
            .strip_prefix("tol.")
            .is_some_and(|n| TOLERANCE_DEFAULTS.iter().any(|(k, _)| *k == n))
}

fn num(v: &str, key: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Config(format!("{key}: '{v}' is not a finite number")))
}

fn int(v: &str, key: &str) -> Result<usize> {
    v.replace('_', "")
        .parse()
        .map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

fn list(v: &str, key: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| num(s.trim(), key)).collect()
}

fn parse_alpha(kind: &str, params: &str) -> Result<AlphaSpec> {
    match kind {
        "constant" => match list(params, "alpha.params")?.as_slice() {
            [c] => Ok(AlphaSpec::Constant(*c)),
            _ => Err(Error::Config("alpha.params for constant needs one value".into())),
        },
        "sine" => match list(params, "alpha.params")?.as_slice() {
            [offset, amplitude, freq] => Ok(AlphaSpec::Sine { offset: *offset, amplitude: *amplitude, freq: *freq }),
            _ => Err(Error::Config("alpha.params for sine needs offset, amplitude, freq".into())),
        },
        "samples" => {
            let mut xs = Vec::new();
            let mut values = Vec::new();
            for pair in params.split(',').filter(|s| !s.trim().is_empty()) {
                let (x, v) = pair
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("alpha.params: '{pair}' is not x:value")))?;
                xs.push(num(x.trim(), "alpha.params")?);
                values.push(num(v.trim(), "alpha.params")?);
            }
            Ok(AlphaSpec::Samples { xs, values })
        }
        other => Err(Error::Config(format!("alpha.kind: unknown kind '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = ExperimentConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c.seed, ExperimentConfig::default().seed);
        assert_eq!(c.tol("mass"), 1e-2);
    }

    #[test]
    fn full_schema_round_trip() {
        let text = "alpha.kind = sine\nalpha.params = 1.4, 0.2, 2\ngrid.lo=-1\ngrid.hi = 1\ngrid.n = 11\n\
                    time.points = 0.1, 0.2\nlambda = 3\ntol.mass = 0.05\nseed = 7\nout.dir = results # trailing\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert!(matches!(c.alpha, AlphaSpec::Sine { offset, amplitude, freq } if offset == 1.4 && amplitude == 0.2 && freq == 2.0));
        assert_eq!((c.grid.lo, c.grid.hi, c.grid.n), (-1.0, 1.0, 11));
        assert_eq!(c.time_points, vec![0.1, 0.2]);
        assert_eq!(c.lambda, 3.0);
        assert_eq!(c.tol("mass"), 0.05);
        assert_eq!(c.seed, 7);
        assert_eq!(c.out_dir, PathBuf::from("results"));
    }

    #[test]
    fn sample_fields_parse() {
        let c = ExperimentConfig::parse("alpha.kind = samples\nalpha.params = -1:1.2, 0:1.5, 1:1.8").unwrap();
        let f = c.alpha_field().unwrap();
        assert!((f.eval(0.5) - 1.65).abs() < 1e-12);
    }

    #[test]
    fn schema_violations_are_config_errors() {
        for text in [
            "bogus = 1",
            "tol.mass = 0",
            "tol.unknown = 1",
            "time.points = 0.2, 0.1",
            "time.points = 0, 0.1",
            "time.points = 0.5, 2",
            "alpha.kind = constant\nalpha.params = 2.5",
            "alpha.kind = wavy",
            "seed = -3",
            "no equals sign",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn environment_overrides_file_values() {
        let env = |k: &str| match k {
            "VARORDER_SEED" => Some("99".to_string()),
            "VARORDER_TOL_DYNKIN" => Some("0.5".to_string()),
            _ => None,
        };
        let c = ExperimentConfig::parse_with_env("seed = 1", env).unwrap();
        assert_eq!(c.seed, 99);
        assert_eq!(c.tol("dynkin"), 0.5);
        assert_eq!(env_name("mc.smalltime_paths"), "VARORDER_MC_SMALLTIME_PATHS");
    }
}
