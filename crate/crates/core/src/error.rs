use std::fmt;

use thiserror::Error;

/// Failures while reading or validating a coefficient cache file.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("unsupported table format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },
    #[error("checksum mismatch: header says {expected}, payload hashes to {actual}")]
    Checksum { expected: String, actual: String },
    #[error("table file truncated: expected {expected} payload bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("malformed table header: {0}")]
    Header(String),
}

#[derive(Debug, Error)]
pub enum ObeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing coefficients for {0}")]
    MissingCoefficients(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error("optimizer: {0}")]
    Optimizer(String),
    #[error("symmetry projection: {0}")]
    Symmetry(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ObeError {
    pub fn domain(msg: impl fmt::Display) -> Self {
        ObeError::Domain(msg.to_string())
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        ObeError::Config(msg.to_string())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        ObeError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, ObeError>;
