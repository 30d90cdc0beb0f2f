//! Experiment reports and CSV output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Where a row's target comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    QuadratureOracle,
    Mc,
    Scaling,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::QuadratureOracle => "quadrature_oracle",
            Provenance::Mc => "mc",
            Provenance::Scaling => "paper_scaling",
        }
    }
}

/// How `value` is compared with `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `|value − target| ≤ tolerance`.
    Within,
    /// `value ≥ target − tolerance`.
    AtLeast,
    /// `value ≤ target + tolerance`.
    AtMost,
}

/// One checked quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
}

impl ReportRow {
    pub fn new(quantity: impl Into<String>, value: f64, target: f64, tolerance: f64, cmp: Comparison, provenance: Provenance) -> Self {
        let pass = value.is_finite()
            && match cmp {
                Comparison::Within => (value - target).abs() <= tolerance,
                Comparison::AtLeast => value >= target - tolerance,
                Comparison::AtMost => value <= target + tolerance,
            };
        Self { quantity: quantity.into(), value, target, tolerance, pass, provenance }
    }

    /// Row for a boolean property, encoded as 1/0 against target 1.
    pub fn flag(quantity: impl Into<String>, holds: bool, provenance: Provenance) -> Self {
        let v = if holds { 1.0 } else { 0.0 };
        Self { quantity: quantity.into(), value: v, target: 1.0, tolerance: 0.0, pass: holds, provenance }
    }
}

/// Flat table written as a raw-data CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = Cell>>(&mut self, cells: I) {
        self.rows.push(cells.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(path)
    }
}

/// A CSV cell with fixed formatting.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v:.12e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Bool(b) => f.write_str(if *b { "true" } else { "false" }),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Result of one experiment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub id: String,
    pub config_echo: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
    pub tables: Vec<Table>,
    pub wall_time_s: f64,
    pub seed: u64,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>, seed: u64, config_echo: Vec<(String, String)>) -> Self {
        Self { id: id.into(), seed, config_echo, ..Default::default() }
    }

    /// Conjunction of all rows; an empty report fails.
    pub fn pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn report_table(&self) -> Table {
        let mut t = Table::new(
            format!("{}_report", self.id),
            &["experiment", "quantity", "value", "target", "tolerance", "pass", "provenance"],
        );
        for r in &self.rows {
            t.push([
                Cell::from(self.id.as_str()),
                Cell::from(r.quantity.as_str()),
                r.value.into(),
                r.target.into(),
                r.tolerance.into(),
                r.pass.into(),
                r.provenance.as_str().into(),
            ]);
        }
        t
    }

    /// Config echo plus crate version and seed; wall time is left out so files are reproducible.
    pub fn meta_table(&self) -> Table {
        let mut t = Table::new(format!("{}_meta", self.id), &["key", "value"]);
        t.push([Cell::from("experiment"), Cell::from(self.id.as_str())]);
        t.push([Cell::from("version"), Cell::from(env!("CARGO_PKG_VERSION"))]);
        t.push([Cell::from("seed"), Cell::Int(self.seed as i64)]);
        for (k, v) in &self.config_echo {
            t.push([Cell::from(k.as_str()), Cell::from(v.as_str())]);
        }
        t
    }

    /// Write report, meta and raw tables into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut out = vec![self.report_table().write(dir)?, self.meta_table().write(dir)?];
        for t in &self.tables {
            out.push(t.write(dir)?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        use Comparison::*;
        let p = Provenance::ClosedForm;
        assert!(ReportRow::new("a", 1.0, 1.05, 0.1, Within, p).pass);
        assert!(!ReportRow::new("a", 1.0, 1.2, 0.1, Within, p).pass);
        assert!(ReportRow::new("a", 0.95, 1.0, 0.1, AtLeast, p).pass);
        assert!(!ReportRow::new("a", 0.85, 1.0, 0.1, AtLeast, p).pass);
        assert!(ReportRow::new("a", 1.05, 1.0, 0.1, AtMost, p).pass);
        assert!(!ReportRow::new("a", f64::NAN, 1.0, 0.1, AtMost, p).pass);
    }

    #[test]
    fn overall_pass_is_conjunction() {
        let mut r = ExperimentReport::new("x", 1, vec![]);
        assert!(!r.pass());
        r.rows.push(ReportRow::flag("a", true, Provenance::Mc));
        assert!(r.pass());
        r.rows.push(ReportRow::flag("b", false, Provenance::Mc));
        assert!(!r.pass());
    }

    #[test]
    fn csv_files_are_reproducible() {
        let dir = std::env::temp_dir().join(format!("varorder-report-{}", std::process::id()));
        let mut r = ExperimentReport::new("demo", 3, vec![("k".into(), "v, with comma".into())]);
        r.rows.push(ReportRow::new("q", 0.1, 0.1, 1e-3, Comparison::Within, Provenance::Scaling));
        let mut t = Table::new("demo_raw", &["x", "y"]);
        t.push([Cell::from(0.5), Cell::from(2usize)]);
        r.tables.push(t);
        let first: Vec<Vec<u8>> = r.write(&dir).unwrap().iter().map(|p| fs::read(p).unwrap()).collect();
        r.wall_time_s = 12.0;
        let second: Vec<Vec<u8>> = r.write(&dir).unwrap().iter().map(|p| fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        let meta = String::from_utf8(first[1].clone()).unwrap();
        assert!(meta.contains("\"v, with comma\""));
        fs::remove_dir_all(&dir).ok();
    }
}
