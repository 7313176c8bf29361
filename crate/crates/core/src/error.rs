use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// The memory budget cannot accommodate the requested work.
    #[error("resource limit: {0}")]
    Resource(String),

    /// On-disk data contradicts the manifest (e.g. an edge outside its block).
    #[error("corrupt graph data: {0}")]
    Corruption(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("vertex {vertex} out of range (|V| = {v_count})")]
    VertexOutOfRange { vertex: u64, v_count: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
