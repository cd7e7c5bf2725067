use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("symmetric part of the stiffness matrix is not positive definite (smallest eigenvalue {min_eigenvalue})")]
    IndefiniteStiffness { min_eigenvalue: f64 },

    #[error(
        "bisection bracket failed: still unstable at d = {upper} (max real part {max_real_part})"
    )]
    BracketFailure { upper: f64, max_real_part: f64 },

    #[error("quartic root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("{0} is empty")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
