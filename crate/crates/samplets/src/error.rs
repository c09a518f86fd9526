//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by point-set ingestion, tree construction and transforms.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file; `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    /// The gridded tree builder found a cell with a point count other than one.
    #[error("grid structure violated: {0}")]
    GridStructure(String),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    /// Dense-transform oracle refused to assemble an `N x N` matrix.
    #[error("dense oracle cutoff exceeded: N = {n} > {cutoff}")]
    OracleCutoff { n: usize, cutoff: usize },

    #[error("coefficient index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("unknown signal name: {0}")]
    UnknownSignal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
