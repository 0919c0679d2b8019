use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    ParseConfig {
        path: PathBuf,
        source: toml::de::Error,
    },

    #[error("invalid config: {field}: {reason}")]
    Config { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(#[from] disparity_core::Error),

    #[error("verification failed: {failures} check(s) outside tolerance")]
    Verification { failures: usize },

    #[error("cannot write {path}: {reason}")]
    Output { path: PathBuf, reason: String },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Rejects a core error raised while building inputs as a config error.
    pub fn in_field(field: &str, err: disparity_core::Error) -> Self {
        CliError::config(field, err.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 1,
            CliError::ReadConfig { .. } | CliError::ParseConfig { .. } | CliError::Config { .. } => 2,
            CliError::Numerical(_) | CliError::Output { .. } => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
