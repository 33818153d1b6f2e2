use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] lar_core::LarError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Errors caused by unreadable or malformed user input (files or config).
    pub fn is_ingestion(&self) -> bool {
        matches!(self, Self::Config(_) | Self::Ingest { .. } | Self::Json(_))
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
