use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter is valid mathematically but outside the supported range.
    #[error("range error: {0}")]
    Range(String),

    #[error("overflow: {0}")]
    Overflow(String),

    /// A numerical routine could not reach its accuracy target.
    #[error("precision error: {0}")]
    Precision(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for faults raised by the numerical kernels rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_) | Error::Precision(_) | Error::NonConvergence(_) | Error::Bracket(_)
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
