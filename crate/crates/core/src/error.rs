use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exponent p = {0} is outside [1, inf)")]
    InvalidExponent(f64),

    #[error("decomposition does not reconstruct its source (relative l2 error {0:e})")]
    InconsistentDecomposition(f64),

    #[error("invalid filter schedule: {0}")]
    InvalidSchedule(String),

    #[error("circulant is singular to machine precision (min |lambda| = {min_abs:e}, max |lambda| = {max_abs:e})")]
    PreconditionerSingular { min_abs: f64, max_abs: f64 },

    #[error("circulant has no eigenvalue above the threshold {0:e}; spectral correction impossible")]
    Uncorrectable(f64),

    #[error("circulant is not symmetric positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("no grid exponent yields a positive definite preconditioner")]
    NoExponentFound,

    #[error("dense diagnostics are limited to n <= {limit} (got {n})")]
    TooLarge { n: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
