use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by graph construction, solvers and experiment I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown catalog graph `{0}`")]
    UnknownGraph(String),

    #[error("invalid parameters for `{family}`: {reason}")]
    InvalidParams { family: String, reason: String },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("vector length {got} does not match operator order {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("order {order} exceeds the dense solver cap {cap}")]
    OverCap { order: usize, cap: usize },

    #[error("graph is disconnected; the nontrivial spectrum is ambiguous")]
    Disconnected,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver residual {residual:e} exceeds bound {bound:e}")]
    Residual { residual: f64, bound: f64 },

    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e}, target {target:e})")]
    NotConverged { iterations: usize, residual: f64, target: f64 },

    #[error("trial {trial} (seed {seed:#018x}) failed twice: {source}")]
    TrialFailed {
        trial: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("batch file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("batch schema version {found}, expected {expected}")]
    SchemaVersion { found: u64, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical solvers, as opposed to bad input.
    pub fn is_solver(&self) -> bool {
        match self {
            Error::Residual { .. } | Error::NotConverged { .. } => true,
            Error::TrialFailed { source, .. } => source.is_solver(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
