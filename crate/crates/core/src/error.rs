use thiserror::Error;

/// Errors produced by the grid, operator, solver and reporting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver diverged at iteration {iteration}: non-finite value encountered")]
    Diverged { iteration: usize },

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
