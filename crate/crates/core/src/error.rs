use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("recipe `{recipe}` not applicable: {reason}")]
    Inapplicable { recipe: &'static str, reason: String },

    #[error(transparent)]
    Landmark(#[from] crate::landmarks::LandmarkError),

    #[error(transparent)]
    Cascade(#[from] crate::cascade::CascadeError),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("input error: {0}")]
    Input(String),

    #[error("plan entry {entry} (`{recipe}`) cannot be fulfilled: {reason}")]
    Unfulfillable {
        entry: usize,
        recipe: String,
        reason: String,
    },

    #[error("image codec error for {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for bad input, 2 for anything internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 2,
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
