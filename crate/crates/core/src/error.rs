use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line} is not valid UTF-8")]
    NonUtf8Line { path: PathBuf, line: usize },

    #[error("{path}: line {line}: {reason}")]
    Record {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{0} is empty")]
    EmptyFile(PathBuf),

    #[error("invalid bucket name {name:?}: {reason}")]
    InvalidName { name: String, reason: &'static str },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("generator starved: no fresh legal candidate after {attempts} draws")]
    GeneratorStarvation { attempts: usize },

    #[error("malformed model container: {0}")]
    Codec(String),

    #[error("malformed pattern {id:?}: {reason}")]
    Pattern { id: String, reason: String },

    #[error("unknown {provider} permission {token:?}")]
    UnknownPermission { provider: String, token: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("live probing refused: {0}")]
    LiveProbingRefused(String),

    #[error("probe backend failure: {0}")]
    Backend(String),

    #[error("namespace capacity exceeded: {0}")]
    Capacity(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
