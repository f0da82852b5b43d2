use thiserror::Error;

/// Errors raised by set construction, weight evaluation and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A query went past the range a set (or an estimator) can answer.
    /// `requested` is the bound the caller needed.
    #[error("{what}: requested {requested} but the supported limit is {limit}")]
    OutOfRange { what: String, requested: u64, limit: u64 },

    #[error("weight `{weight}` is not defined at x = {x}")]
    OutOfDomain { weight: String, x: f64 },

    #[error("weight `{weight}` overflowed double precision ({detail}); use log-space accumulation")]
    NumericRange { weight: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
