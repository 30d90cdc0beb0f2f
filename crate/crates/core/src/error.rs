//! Error type shared across the crate.

use thiserror::Error;

/// Failures raised by numerical routines and configuration handling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("order value {value} at x={at} lies outside (0,2)")]
    Range { value: f64, at: f64 },
    #[error("degenerate order field: {0}")]
    Degenerate(String),
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("stencil leaves the domain at x={x}, h={h}")]
    Domain { x: f64, h: f64 },
    #[error("no admissible stencil: {0}")]
    EmptyStencil(String),
    #[error("spatial truncation too small: {0}")]
    Truncation(String),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("resolvent horizon too short: {0}")]
    Horizon(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
