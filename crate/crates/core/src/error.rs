use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. Each variant maps onto one of the CLI exit
/// codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: row {row}: {violation}")]
    Row {
        path: String,
        row: usize,
        violation: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown app(s) {unknown:?}; available apps: {available:?}")]
    UnknownApps {
        unknown: Vec<String>,
        available: Vec<String>,
    },

    #[error("invalid hyperparameter for {algorithm}: {message}")]
    Hyperparameter { algorithm: String, message: String },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("class {class} has {members} members, fewer than the {folds} folds requested")]
    ClassTooSmall {
        class: &'static str,
        members: usize,
        folds: usize,
    },

    #[error("repeat {repeat}, fold {fold}: {source}")]
    Fold {
        repeat: usize,
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("model file {path}: {message}")]
    Model { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for input/validation problems, 3 for model I/O, 4 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Model { .. } => 3,
            Error::Fold { source, .. } => source.exit_code(),
            Error::Json(_) => 4,
            _ => 2,
        }
    }
}
