use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed field. `offset` is a byte offset into the field when known.
    #[error("format error{}: {message} (value {value:?})", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Format {
        message: String,
        value: String,
        offset: Option<usize>,
        line: Option<usize>,
    },

    #[error("alignment error{}: {message}", line.map(|l| format!(" on line {l}")).unwrap_or_default())]
    Alignment { message: String, line: Option<usize> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown token: no vocabulary piece matches {piece:?} in {word:?}")]
    UnknownToken { word: String, piece: String },

    #[error("word {0:?} has no derivation under the model")]
    Underivable(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(message: impl Into<String>, value: impl Into<String>) -> Self {
        Error::Format {
            message: message.into(),
            value: value.into(),
            offset: None,
            line: None,
        }
    }

    pub(crate) fn format_at(message: impl Into<String>, value: impl Into<String>, offset: usize) -> Self {
        Error::Format {
            message: message.into(),
            value: value.into(),
            offset: Some(offset),
            line: None,
        }
    }

    pub(crate) fn alignment(message: impl Into<String>) -> Self {
        Error::Alignment {
            message: message.into(),
            line: None,
        }
    }

    /// Attach a 1-based line number to format and alignment errors.
    pub fn at_line(self, line_no: usize) -> Self {
        match self {
            Error::Format {
                message,
                value,
                offset,
                ..
            } => Error::Format {
                message,
                value,
                offset,
                line: Some(line_no),
            },
            Error::Alignment { message, .. } => Error::Alignment {
                message,
                line: Some(line_no),
            },
            other => other,
        }
    }
}
