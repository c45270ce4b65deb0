use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An instance or cache file could not be parsed.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    /// A stored result contradicts itself (certificate mismatch, impossible weight).
    #[error("integrity error: {0}")]
    Integrity(String),
    /// An experiment configuration is invalid.
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl MapError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        MapError::Domain(msg.into())
    }
}

impl From<std::io::Error> for MapError {
    fn from(e: std::io::Error) -> Self {
        MapError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, MapError>;
