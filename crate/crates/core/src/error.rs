use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A geometric construction needed a non-degenerate frame or direction.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A point is untracked on the first or last frame, so the gap has only
    /// one tracked neighbour.
    #[error("point `{point}` is untracked at the sequence boundary; trim the session first")]
    BoundaryExtrapolation { point: String },

    #[error("every label tuple is masked out; nothing to decode")]
    InfeasibleDecode,

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
