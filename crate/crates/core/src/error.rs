use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// The Cholesky factorization of a Gram matrix hit a pivot below the
    /// relative threshold, so the system is not numerically independent.
    #[error("Gram numerically singular: pivot {pivot:.3e} at index {index} (threshold {threshold:.3e})")]
    GramSingular {
        pivot: f64,
        index: usize,
        threshold: f64,
    },

    #[error("packing budget exceeded: round {round} needs N = {needed}, cap is {cap}")]
    PackingBudgetExceeded { round: usize, needed: usize, cap: usize },

    #[error("closed-form Gram entry ({row}, {col}) disagrees with quadrature by {error:.3e}")]
    ConventionMismatch { row: usize, col: usize, error: f64 },

    #[error("quadrature too coarse: {nodes} nodes, need at least {required}")]
    CoarseRule { nodes: usize, required: usize },

    #[error("{nodes} Nyström nodes below the aliasing floor {required} for c = {c}")]
    AliasingRisk { c: f64, nodes: usize, required: usize },

    #[error("need {needed} system members but only {available} are available")]
    InsufficientMembers { needed: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
