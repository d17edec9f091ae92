use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by configuration handling, experiment execution and
/// artifact I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A config file or flag value could not be interpreted; the message
    /// names the offending field.
    #[error("config: {0}")]
    Config(String),

    /// The solver library rejected or aborted the experiment.
    #[error(transparent)]
    Solver(#[from] ngmres::Error),

    /// Reading or writing an artifact failed.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A stored artifact exists but does not have the expected shape.
    #[error("artifact {path}: {message}")]
    Artifact { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn artifact(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Artifact { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
