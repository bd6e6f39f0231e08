use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit count {0} outside the supported range {1}..={2}")]
    QubitCount(usize, usize, usize),

    #[error("invalid qubit selection: {0}")]
    InvalidSelection(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("invalid channel parameters: {0}")]
    Channel(String),

    #[error("invalid time {0}: times must be finite and non-negative")]
    NegativeTime(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed state file {path}: {reason}")]
    StateFile { path: PathBuf, reason: String },

    #[error("sample {index} (seed {seed:#018x}) failed: {source}")]
    Sample {
        index: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
