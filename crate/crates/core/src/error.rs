//! Error types shared across the crate.

use thiserror::Error;

/// Top-level error type. Variants map onto the CLI exit-code contract:
/// validation problems exit 1, solver problems exit 2, budget refusals 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("solver error: {0}")]
    Solve(String),

    #[error("solution decode error: {0}")]
    Decode(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub fn solve(msg: impl Into<String>) -> Self {
        Error::Solve(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
