use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Validation { name: &'static str, reason: String },

    #[error("argument outside the domain of {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("accuracy target missed in {what}: estimate {estimate:.3e} > tolerance {tolerance:.3e}")]
    Accuracy {
        what: String,
        estimate: f64,
        tolerance: f64,
    },

    #[error("boundary solver failed in window {window}: residual {residual:.3e}")]
    Solver { window: usize, residual: f64 },

    #[error("matching system is ill-conditioned (condition estimate {condition:.3e}, relative residual {residual:.3e}); increase the truncation order or rescale")]
    Conditioning { condition: f64, residual: f64 },

    #[error("overflow evaluating Fourier coefficients of channel {channel}")]
    Overflow { channel: i64 },
}

impl Error {
    pub(crate) fn validation(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
