use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {message}")]
    Parse { path: String, line: u64, message: String },

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] msar_mc::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: &str, line: u64, message: impl Into<String>) -> Self {
        HarnessError::Parse { path: path.to_string(), line, message: message.into() }
    }
}
