use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}:{line}: duplicate document id `{id}`")]
    DuplicateId { path: PathBuf, line: usize, id: String },

    #[error("labels reference unknown document id `{0}`")]
    UnknownDocument(String),

    #[error("missing labels for {} document(s): {}", .0.len(), .0.join(", "))]
    MissingLabels(Vec<String>),

    #[error("summary is empty")]
    EmptySummary,

    #[error("no labeled sentences to build a positional distribution from")]
    NoLabeledSentences,

    #[error("no patterns found in ground-truth sentences")]
    NoPatterns,

    #[error("cannot split {items} item(s) into {bins} bins")]
    TooFewItems { items: usize, bins: usize },

    #[error("corpus `{corpus}` has no {split} split")]
    MissingSplit { corpus: String, split: String },

    #[error("document `{0}` has no domain field")]
    MissingDomain(String),

    #[error("invalid threshold set: {0}")]
    InvalidThresholds(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
