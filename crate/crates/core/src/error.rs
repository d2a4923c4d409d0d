use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong shape, non-finite entries, bad parameters.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A spectral function was asked to act outside `(0, ∞)`.
    #[error("eigenvalue {value:e} at index {index} is not strictly positive")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The eigensolver (or another iterative kernel) failed.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
