use thiserror::Error;

/// Errors raised by the model functions, simulators and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent walker state: {0}")]
    InconsistentState(String),

    #[error("{0}")]
    InsufficientData(String),

    #[error("work limit exceeded: {requested} > {limit}")]
    WorkLimit { requested: u128, limit: u128 },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
