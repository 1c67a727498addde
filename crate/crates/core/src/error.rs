use num_complex::Complex64;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An inverse was requested for a residue sharing a factor with the modulus.
    #[error("{value} is not invertible modulo {modulus}: gcd = {gcd}")]
    NotCoprime { value: i64, modulus: u64, gcd: u64 },

    /// A work or memory budget was exceeded. Carries the best value obtained so far.
    #[error("resource limit exceeded: {message}")]
    Resource {
        message: String,
        best_estimate: Option<Complex64>,
    },

    /// Loss of accuracy or an ill-conditioned construction.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A fitted model does not reproduce the data it was fitted to.
    #[error("calibration error: {0}")]
    Calibration(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn resource(msg: impl Into<String>, best_estimate: Option<Complex64>) -> Self {
        Error::Resource {
            message: msg.into(),
            best_estimate,
        }
    }

    /// True for errors caused by exhausted budgets rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
