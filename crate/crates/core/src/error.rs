use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("image is {width}x{height}, smaller than the {window}x{window} window")]
    ImageTooSmall { width: usize, height: usize, window: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("class {class} has {count} samples, at least {needed} required")]
    ClassTooSmall { class: u32, count: usize, needed: usize },

    #[error("label {label} outside 1..={classes}")]
    LabelOutOfRange { label: u32, classes: usize },

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },

    #[error("{}: {source}", path.display())]
    Image { path: PathBuf, source: image::ImageError },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), msg: msg.into() }
    }

    /// Process exit code for the command line: 1 for numerical failures during
    /// a run, 2 for anything caused by bad input, configuration or paths.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotPositiveDefinite => 1,
            _ => 2,
        }
    }
}
