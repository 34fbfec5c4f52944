use std::path::Path;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] seedtopic::Error),
    #[error("missing {what}: run `seedtopic {stage}` first")]
    Missing { what: &'static str, stage: &'static str },
    #[error("stale {what}: inputs or configuration changed since it was built; rerun `seedtopic {stage}`")]
    Stale { what: &'static str, stage: &'static str },
    #[error("hash mismatch for {path}: the file changed after it was written; rerun `seedtopic {stage}`")]
    HashMismatch { path: String, stage: &'static str },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest {path}: {message}")]
    Manifest { path: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use seedtopic::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Config { .. } => "config",
                E::Invalid(_) => "invalid",
                E::MissingSeeds(_) => "missing_seeds",
                E::EmptyCorpus => "empty_corpus",
                E::Embedding(_) => "embedding",
                E::Training(_) => "training",
                E::Format { .. } => "format",
                E::Io(_) => "io",
            },
            CliError::Missing { .. } => "missing_artifact",
            CliError::Stale { .. } => "stale_artifact",
            CliError::HashMismatch { .. } => "hash_mismatch",
            CliError::Io { .. } => "io",
            CliError::Manifest { .. } => "manifest",
            CliError::Usage(_) => "usage",
        }
    }

    /// One-line JSON form for stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            message: self.to_string(),
        })
        .expect("plain struct serializes")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
