use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the relational-analysis engine.
#[derive(Debug, Error)]
pub enum LraError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("invalid word pair `{0}`")]
    InvalidPair(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("log-entropy weighting needs at least two rows, matrix has {0}")]
    TooFewRows(usize),

    #[error(
        "svd did not converge after {steps} Lanczos steps (max residual {residual:.3e}, tolerance {tolerance:.3e})"
    )]
    SvdNonConvergence {
        steps: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("svd input has no nonzero entries")]
    EmptyMatrix,

    #[error("cosine of a zero-norm vector is undefined")]
    ZeroVector,

    #[error("unknown relation class `{0}`")]
    UnknownClass(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed cache file {}: {message}", path.display())]
    Cache { path: PathBuf, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LraError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LraError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        LraError::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LraError>;
