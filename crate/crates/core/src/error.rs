//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the optimizer toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's contract (bad argument, bad state).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A vector had the wrong length for the problem at hand.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An unrecognized base-function name.
    #[error("unknown base kind: {0:?}")]
    UnknownBase(String),

    /// A transform-data file could not be parsed.
    #[error("malformed transform data: {0}")]
    TransformData(String),

    /// An invalid run or training configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Two Q-tables (or a table and a policy) disagree on bin metadata.
    #[error("bin metadata mismatch: {0}")]
    MetadataMismatch(String),

    /// A serialized policy or table has the wrong schema or version.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
