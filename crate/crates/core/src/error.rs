use thiserror::Error;

/// Errors raised by model construction, parsing, evaluation and the oracles.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("policy does not fit model: {0}")]
    DomainMismatch(String),

    #[error("policy horizon {policy} is shorter than requested horizon {requested}")]
    HorizonMismatch { policy: usize, requested: usize },

    #[error("{what}: {needed} exceeds cap {cap}")]
    CapExceeded { what: &'static str, needed: String, cap: u64 },

    #[error("cycle detected: {0}")]
    Cycle(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
