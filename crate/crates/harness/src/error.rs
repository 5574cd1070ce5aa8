use std::path::PathBuf;

use switchlearn_core::Assumption;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Model(#[from] switchlearn_core::Error),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("failed to parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("assumption {assumption} violated: {detail}")]
    Assumption { assumption: Assumption, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {file} line {line}: {reason}")]
    Format {
        file: &'static str,
        line: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
