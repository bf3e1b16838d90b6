use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("empty signal: {0}")]
    EmptySignal(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate entry at line {line}: {path}")]
    Duplicate { line: usize, path: String },

    #[error("manifest has no entries")]
    EmptyManifest,

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("input too short: {0}")]
    TooShort(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("feature extraction failed for {path}: {source}")]
    Extraction {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    /// True for errors that come from arguments or configuration rather than data.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Argument(_))
    }

    /// True for non-finite values or training divergence.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric(_) => true,
            Error::Extraction { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
