//! Domain types: grids, density fields, rate families, mutation kernels,
//! and validation of the model's standing assumptions.

mod grid;
pub mod kernel;
mod params;
pub mod rates;

pub use grid::{sample_grid_density, DensityField, EigenPair, Grid};
pub use kernel::{validate_kernel, KernelReport, KernelShape, MinorizationCertificate, MutationKernel};
pub use params::ModelParams;
pub use rates::{DecayExponent, Polynomial, RateSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid rate specification: {0}")]
    InvalidRates(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("density values must be finite and nonnegative")]
    NegativeDensity,
    #[error("invalid eigenpair: {0}")]
    InvalidEigenPair(String),
    #[error(
        "kernel mass deviates from 1 (row {row_deviation:.3e}, column {col_deviation:.3e}, tolerance {tolerance:.3e})"
    )]
    DoubleStochasticityViolation {
        row_deviation: f64,
        col_deviation: f64,
        tolerance: f64,
    },
    #[error("kernel mass {leak:.3e} escapes the grid (tolerance {tolerance:.3e})")]
    MassLeak { leak: f64, tolerance: f64 },
}
