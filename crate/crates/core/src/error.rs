//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An encoded image stream could not be parsed.
    #[error("decode failed at byte {offset}: {message}")]
    Decode { offset: u64, message: String },

    /// Affine estimation could not produce a transform.
    #[error("affine estimation failed: {0}")]
    Estimation(String),

    /// A numerical routine broke down (singular system, no convergence).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Bad pipeline configuration.
    #[error("config: {0}")]
    Config(String),

    /// A batch manifest line could not be parsed.
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
