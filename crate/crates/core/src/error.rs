//! Error type shared by every module in the crate.
//!
//! Variants are grouped by how a caller should react: bad configuration is
//! the caller's fault and is reported before any work starts, I/O and format
//! problems point at a concrete file, shape mismatches point at inconsistent
//! in-memory arguments, and numeric failures flag computations that produced
//! non-finite values or failed to converge.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Failure of an underlying filesystem operation, tagged with the path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was readable but its contents do not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    /// In-memory arguments disagree (row counts, dimensions, lengths).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid parameter or configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A computation produced non-finite values or failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command-line interface: 2 for
    /// configuration problems, 3 for data problems, 4 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Io { .. } | Error::Format(_) | Error::Shape(_) => 3,
            Error::Numeric(_) => 4,
        }
    }

    /// Prefix the message with the pipeline stage that produced it so
    /// multi-stage commands report where they stopped.
    pub fn in_stage(self, stage: &str) -> Self {
        match self {
            Error::Io { path, source } => Error::Io { path, source },
            Error::Format(m) => Error::Format(format!("{stage}: {m}")),
            Error::Shape(m) => Error::Shape(format!("{stage}: {m}")),
            Error::Config(m) => Error::Config(format!("{stage}: {m}")),
            Error::Numeric(m) => Error::Numeric(format!("{stage}: {m}")),
        }
    }
}
