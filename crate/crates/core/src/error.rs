use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vector")]
    EmptyVector,

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sampling density exceeds vector length ({selected} > {len})")]
    DensityExceedsLength { selected: usize, len: usize },

    #[error("vector of length {0} is too long for exhaustive enumeration; use Monte Carlo path")]
    UseMonteCarlo(usize),

    #[error("bound verification requires uniform-threshold selection, got {0}")]
    WrongSelectionMode(String),

    #[error("class index {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },

    #[error("training diverged at step {step}: non-finite {what}")]
    Divergence { step: usize, what: &'static str },

    #[error("idx format error at byte offset {offset}: {message}")]
    Idx { offset: u64, message: String },

    #[error("config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
