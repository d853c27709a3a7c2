use thiserror::Error;

/// Crate-wide error type.
///
/// `Domain` marks parameters outside the mathematical domain of an operation
/// (for example a jump exponent at or below 2, where the jump variance
/// diverges). `InvalidArgument` marks structurally bad call arguments,
/// `Numeric` marks a numerical method that failed to meet its contract, and
/// `Config` marks problems with experiment configuration files.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by bad user input (CLI maps these to exit code 2).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::InvalidArgument(_) | Error::Config(_) | Error::Json(_)
        )
    }
}
