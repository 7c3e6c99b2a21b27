use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Tables that do not describe a well-formed object: dangling ids,
    /// wrong shapes, maps defined off their domain.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("arrows {left} and {right} are not composable")]
    NotComposable { left: String, right: String },

    #[error("arrow {arrow} does not factor uniquely: {reason}")]
    Factorization { arrow: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("unknown corpus entry `{0}`")]
    UnknownEntry(String),

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
