use std::path::PathBuf;

use thiserror::Error;

/// Errors shared by every pipeline stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid utf-8 in {path} at byte offset {offset}")]
    InvalidUtf8 { path: PathBuf, offset: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty document: {0}")]
    EmptyDocument(String),

    #[error("duplicate document id: {0}")]
    DuplicateDocId(String),

    #[error("vector file {path} line {line}: {reason}")]
    VectorFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    /// Precondition violation on an operation's inputs.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
