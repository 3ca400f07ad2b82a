//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural misuse: incompatible dimensions, invalid hyperparameters,
    /// malformed config values.
    #[error("configuration error: {0}")]
    Config(String),

    /// A row of an input file could not be accepted.
    #[error("ingestion error at row {row}: {reason}")]
    Ingest { row: usize, reason: String },

    /// A loss or statistic became non-finite; the offending update is aborted.
    #[error("numerical error: {0}")]
    Numeric(String),

    /// An expected artifact is missing or inconsistent.
    #[error("artifact error: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn artifact(msg: impl Into<String>) -> Self {
        Error::Artifact(msg.into())
    }
}
