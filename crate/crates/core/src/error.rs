//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WlbcError {
    /// A matrix expected to be symmetric positive definite failed its
    /// Cholesky factorization. Typically signals K > 2M (widely linear) or
    /// K > M (linear) or a degenerate channel draw.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("zero vector supplied to {0}")]
    ZeroVector(&'static str),

    #[error("user {0} has a zero channel")]
    ZeroChannel(usize),

    #[error("precoder has zero transmit power, cannot normalize")]
    ZeroPrecoder,

    #[error("effective gain is not positive ({0}); precoder violates the sign convention")]
    NonPositiveGain(f64),

    #[error("zero complex gain supplied to QAM detection")]
    ZeroGain,

    #[error("constellation kind mismatch: expected {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure rate {failed}/{total} exceeds 1% of realizations")]
    TooManyFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, WlbcError>;
