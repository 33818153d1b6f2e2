use thiserror::Error;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LarError {
    #[error("rejected input: {0}")]
    RejectedInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerically singular system at {context} (pivot {pivot:e}, cutoff {cutoff:e})")]
    Singular {
        context: String,
        pivot: f64,
        cutoff: f64,
    },
    #[error("frozen value undefined for signed index {index}: theta = {theta}")]
    UndefinedFrozen { index: usize, theta: f64 },
    #[error("non-finite integrand value {value} at point {point:?}")]
    NonFiniteIntegrand { value: f64, point: Vec<f64> },
    #[error("unreliable denominator: {value:e} <= 3 x std error {std_error:e}")]
    UnreliableDenominator { value: f64, std_error: f64 },
    #[error("variance split failed: {0}")]
    Split(String),
}

pub type Result<T> = std::result::Result<T, LarError>;
