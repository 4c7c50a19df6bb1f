use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left} vs {right}")]
    Dimension {
        op: &'static str,
        left: String,
        right: String,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed dependency structure: {0}")]
    Structure(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("inconsistent data: {0}")]
    Consistency(String),

    #[error("duplicate key: {0}")]
    Duplicate(String),

    #[error("no embedding for doc {doc_id:?} token {token}")]
    Lookup { doc_id: String, token: u32 },

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("label error in row {id}: {msg}")]
    Label { id: String, msg: String },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid usage: {0}")]
    Usage(String),

    #[error("{0} out of range")]
    Range(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(op: &'static str, left: impl Into<String>, right: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            left: left.into(),
            right: right.into(),
        }
    }

    /// True for errors caused by bad input or configuration, as opposed to
    /// failures that happen while running (I/O, divergence, NaN gradients).
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::NonFinite(_) | Error::Divergence(_) | Error::Check(_)
        )
    }
}
