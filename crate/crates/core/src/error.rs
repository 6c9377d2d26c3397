use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    NoConvergence {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
    #[error("integral diverges: {0}")]
    Divergent(&'static str),
}

/// Which branch of the hop-count feasibility analysis ruled out every candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfeasibleCase {
    /// The availability lower bound on the hop count already exceeds the
    /// jitter-imposed upper bound.
    EmptyRange,
    /// The range is non-empty, but no hop count satisfies the coverage constraint.
    NoCandidate,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("hop-count optimization infeasible ({0:?})")]
    Infeasible(InfeasibleCase),
    #[error("topology is unroutable: hop {hop} cannot be unblocked")]
    Unroutable { hop: usize },
    #[error("greedy strategy reached a dead end after {hops} hops")]
    DeadEnd { hops: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
