use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {field}: {message}")]
    Channel {
        path: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Syntax { path: String, message: String },

    #[error("cannot {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] bcbounds_core::Error),

    #[error("cannot encode report: {0}")]
    Encode(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
