use std::path::PathBuf;

use toa_core::Method;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] toa_core::Error),

    #[error("invalid scenario config: {0}")]
    Config(String),

    #[error("unknown preset `{0}` (expected one of A1, A2, A3, B0, B1, B2, C1, C2)")]
    UnknownPreset(String),

    #[error("failed to parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{method} failed in {failed} of {runs} runs (more than 10%)")]
    TooManyFailures {
        method: Method,
        failed: usize,
        runs: usize,
    },

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
