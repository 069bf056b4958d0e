use thiserror::Error;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad config, flag or input shape.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// A checked inequality or acceptance property did not hold.
    #[error("check failed: {0}")]
    CheckFailed(String),
    /// Work ran but some of it failed.
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Core(#[from] cggibbs::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Validation(_) => 1,
            BenchError::CheckFailed(_) => 2,
            BenchError::Core(cggibbs::Error::InvalidArgument(_)) => 1,
            _ => 3,
        }
    }
}

pub type BenchResult<T> = std::result::Result<T, BenchError>;
