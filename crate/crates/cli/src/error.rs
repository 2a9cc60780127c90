use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] lift_spectra::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
}

impl CliError {
    /// Process exit code: 2 usage, 3 input, 4 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_solver() => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
