use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: invalid UTF-8", path.display())]
    Encoding { path: PathBuf, line: usize },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Row { path: PathBuf, line: u64, message: String },

    #[error("{} is schema version {found}, expected {expected}", path.display())]
    Schema { path: PathBuf, found: u32, expected: u32 },

    #[error("ground truth rows without a matching scanned test: {}", .0.join(", "))]
    Orphans(Vec<String>),

    #[error("every document failed ({0} of {0})")]
    AllFailed(usize),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] statfidelity_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
