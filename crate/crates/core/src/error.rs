use std::io;

use thiserror::Error;

/// Errors produced by the modelling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error("seed words missing from vocabulary: {0}")]
    MissingSeeds(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("{0}")]
    Embedding(String),

    #[error("{0}")]
    Training(String),

    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::Invalid(message.into())
    }

    pub(crate) fn format(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable category for the error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Invalid(_) => "invalid",
            Error::MissingSeeds(_) => "missing_seeds",
            Error::EmptyCorpus => "empty_corpus",
            Error::Embedding(_) => "embedding",
            Error::Training(_) => "training",
            Error::Format { .. } => "format",
            Error::Io(_) => "io",
        }
    }
}
