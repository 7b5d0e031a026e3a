use thiserror::Error;

/// Errors raised by the numerical routines and the configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical error: {message} (last bracket [{lower:e}, {upper:e}])")]
    Numerical {
        message: String,
        lower: f64,
        upper: f64,
    },

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("permutation {permutation} is not maximal: P_D(s0) = {pressure:e}")]
    NonMaximal { permutation: String, pressure: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid system{}: {message}", .index.map(|i| format!(" (matrix {i})")).unwrap_or_default())]
    Validation {
        index: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn validation(index: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Validation {
            index,
            message: msg.into(),
        }
    }

    /// True for errors caused by the numerics rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical { .. } | Error::Internal(_) | Error::Budget(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
