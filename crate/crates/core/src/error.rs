use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point norm {norm} exceeds domain bound {bound}")]
    OutOfDomain { norm: f64, bound: f64 },

    #[error("label {label} is not admissible: {reason}")]
    InadmissibleLabel { label: f64, reason: String },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("size limit exceeded: {what} is {got}, limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("weights must sum to 1 (got {0})")]
    NotNormalized(f64),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
