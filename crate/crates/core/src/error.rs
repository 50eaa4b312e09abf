use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {message}")]
    Numeric {
        message: String,
        best_estimate: Option<f64>,
    },
    #[error("degenerate parameters: {0}")]
    Degenerate(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>, best_estimate: Option<f64>) -> Self {
        Error::Numeric {
            message: msg.into(),
            best_estimate,
        }
    }

    /// Best available estimate carried by a numeric failure.
    pub fn best_estimate(&self) -> Option<f64> {
        match self {
            Error::Numeric { best_estimate, .. } => *best_estimate,
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
