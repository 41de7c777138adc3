use thiserror::Error;

/// Errors raised by the analytic and sampling routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested order coincides with (or lies beyond) a pole of a Γ-product.
    #[error("pole of the moment function at M = {location} ({what})")]
    Pole { location: f64, what: String },

    /// Input that carries no information (e.g. an all-zero matrix).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A numerical procedure did not reach its declared accuracy.
    #[error("accuracy target {target:e} not met: achieved error estimate {achieved:e} ({context})")]
    Accuracy {
        target: f64,
        achieved: f64,
        context: String,
    },

    /// The operation is supported in principle but not for these parameters.
    #[error("capability limit: {0}")]
    Capability(String),

    /// Inputs that are individually valid but do not fit together.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Sampling stopped before producing everything that was asked for.
    #[error("partial result: delivered {delivered} of {requested} samples ({reason})")]
    Partial {
        delivered: usize,
        requested: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn pole(location: f64, what: impl Into<String>) -> Self {
        Error::Pole {
            location,
            what: what.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
