use thiserror::Error;

/// Errors raised anywhere in the sampling toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("index {index} out of range for length {len} ({context})")]
    IndexOutOfRange {
        index: usize,
        len: usize,
        context: &'static str,
    },

    #[error("non-finite value {value} at {context}")]
    NonFinite { value: f64, context: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("no convergence after {iterations} iterations: {context}")]
    NoConvergence { iterations: usize, context: String },

    #[error("linear-predictor cache out of sync at row {row}: cached {cached}, fresh {fresh}")]
    InconsistentCache { row: usize, cached: f64, fresh: f64 },

    #[error("series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-binary label {label:?} at line {line}")]
    NonBinaryLabel { label: String, line: usize },

    #[error("column {column} has zero variance and cannot be standardized")]
    ZeroVarianceColumn { column: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, context: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            value,
            context: context(),
        })
    }
}
