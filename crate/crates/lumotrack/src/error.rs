use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input value violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value violates its documented invariants.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Input is degenerate (e.g. an all-black image) and the operation has
    /// no meaningful result; callers usually substitute an identity.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A required data asset (e.g. the color-names lookup table) could not
    /// be loaded.
    #[error("missing asset {path}: {reason}")]
    MissingAsset { path: PathBuf, reason: String },

    /// A sequence or results file does not follow the expected format.
    #[error("format error in {path}{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Format {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(
        path: impl Into<PathBuf>,
        line: Option<usize>,
        msg: impl Into<String>,
    ) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
