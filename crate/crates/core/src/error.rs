use thiserror::Error;

/// Errors produced by constructors, operations and checkers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("shape mismatch: expected {expected} agents, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("invalid belief at agent {agent}: {value} is not in [0, 1]")]
    InvalidBelief { agent: usize, value: f64 },

    #[error("invalid influence I[{from}][{to}] = {value}")]
    InvalidWeight { from: usize, to: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("not an influence path: agent {from} has no direct influence over agent {to}")]
    NotAPath { from: usize, to: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
