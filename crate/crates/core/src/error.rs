use thiserror::Error;

/// Errors raised by builders, validators and spectral routines.
#[derive(Debug, Error)]
pub enum HdxError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("size limit exceeded: {what} has {actual} elements, cap is {cap}")]
    Size {
        what: String,
        actual: usize,
        cap: usize,
    },

    #[error("structural violation: {message} (witness: {witness})")]
    Structural { message: String, witness: String },

    #[error("graph is disconnected: vertices {a} and {b} lie in different components")]
    Disconnected { a: usize, b: usize },

    #[error("mode error: {0}")]
    Mode(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl HdxError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        HdxError::Parameter(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        HdxError::Infeasible(msg.into())
    }

    pub(crate) fn structural(message: impl Into<String>, witness: impl Into<String>) -> Self {
        HdxError::Structural {
            message: message.into(),
            witness: witness.into(),
        }
    }
}

impl From<serde_json::Error> for HdxError {
    fn from(e: serde_json::Error) -> Self {
        HdxError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HdxError>;
