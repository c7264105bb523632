use thiserror::Error;

/// Errors produced by channel modelling, code construction and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("row {row} of the transition matrix sums to {sum}, off by more than {tolerance}")]
    RowSum { row: usize, sum: f64, tolerance: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("channel `{0}` is not output-symmetric")]
    NotSymmetric(String),

    #[error("instance too large: {terms} enumeration terms exceed the limit of {limit}")]
    TooLarge { terms: u128, limit: u128 },

    #[error(
        "degradation inclusion violated: wiretap-good indices {0:?} (1-based) are not good for the main channel"
    )]
    DegradationViolation(Vec<usize>),

    #[error("security value delta_n = {delta:e} lies outside the admissible window [{lower:e}, {upper:e}]")]
    DeltaOutOfWindow { delta: f64, lower: f64, upper: f64 },

    #[error("wrong message length: expected a multiple of {expected} bits, got {actual}")]
    MessageLength { expected: usize, actual: usize },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
