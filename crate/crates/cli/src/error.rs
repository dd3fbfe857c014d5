use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration (exit 2).
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] fnls_core::Error),
    /// A verification did not pass (exit 1).
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            _ => 2,
        }
    }
}
