//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by dataset validation, solvers, tuners and generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {0} has zero variance; constant predictors cannot be standardized")]
    ConstantColumn(usize),

    #[error("input contains NaN or infinite values")]
    NonFinite,

    #[error("sigma2 must be positive and finite, got {0}")]
    InvalidSigma(f64),

    #[error("number of folds must satisfy 2 <= K <= n, got K={k} with n={n}")]
    BadK { k: usize, n: usize },

    #[error("AR(1) coefficient must satisfy |rho| < 1, got {0}")]
    BadRho(f64),

    #[error("contamination fraction must lie in [0, 0.5), got {0}")]
    BadFraction(f64),

    #[error("active count {p_active} exceeds predictor count {p}")]
    BadCounts { p_active: usize, p: usize },

    #[error("signal has zero variance; cannot calibrate noise for a target SNR")]
    DegenerateSignal,

    #[error("invalid grid: {0}")]
    BadGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
