//! Numerics for stable-like processes whose order varies in space.

pub mod error;
pub mod field;
pub mod grid;
pub mod quad;
pub mod stable;

pub use error::{Error, Result};
pub mod zygmund;
pub mod spectral;
pub mod symbol;
pub mod parametrix;
pub mod generator;
pub mod montecarlo;
pub mod config;
pub mod report;
pub mod verify;
pub mod experiment;
