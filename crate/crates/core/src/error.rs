use thiserror::Error;

/// Errors raised by samplers, simulators and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the model is defined.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A configured resource cap (atom count, proposal count) would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// An internal contract was violated; indicates a bug or a broken invariant.
    #[error("internal error: {0}")]
    Internal(String),
    /// Experiment configuration could not be parsed or validated.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for invalid input, 3 for resource caps, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) | Error::Json(_) => 2,
            Error::Resource(_) => 3,
            Error::Internal(_) | Error::Io(_) => 1,
        }
    }

    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Resource(_) => "resource",
            Error::Internal(_) => "internal",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
