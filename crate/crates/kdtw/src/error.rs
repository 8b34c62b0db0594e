use thiserror::Error;

/// Errors produced by curve construction, dataset I/O and the distance kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid traversal for a {rows}x{cols} matrix")]
    InvalidTraversal { rows: usize, cols: usize },

    #[error("instance too large for exhaustive enumeration: {rows}+{cols} > {limit}")]
    SizeGuardExceeded {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
