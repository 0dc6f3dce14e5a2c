use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("data quality: {filled:.2}% of samples required gap filling (limit {limit:.2}%)")]
    DataQuality { filled: f64, limit: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("rank deficient: effective rank {rank} is below the requested {requested} sources")]
    RankDeficient { rank: usize, requested: usize },

    #[error("only {found} spectral peaks resolvable in the gait band, {requested} requested")]
    PeakResolution { found: usize, requested: usize },

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
