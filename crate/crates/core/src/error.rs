use std::path::PathBuf;

use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A name or parameter set does not describe a valid configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data could not be used (bad file contents, length mismatch, ...).
    #[error("data error: {0}")]
    Data(String),
    /// Something that should be unreachable happened (e.g. a rejection
    /// sampler exhausted its retry budget).
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
