use alloc::string::String;

use crate::graph::DagOperator;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} is out of range for a graph on {q} nodes")]
    VertexOutOfRange { vertex: usize, q: usize },

    #[error("edge {from} -> {to} is not allowed: {reason}")]
    InvalidEdge {
        from: usize,
        to: usize,
        reason: &'static str,
    },

    #[error("edge set contains a directed cycle")]
    Cyclic,

    #[error("operator {0} is not valid for the current DAG")]
    InvalidOperator(DagOperator),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{0} is not symmetric positive definite")]
    NotPositiveDefinite(&'static str),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Both response classes are needed for the threshold posterior to be proper.
    #[error(
        "the response must contain at least one 0 and one 1 \
         (found {zeros} zeros and {ones} ones); the threshold posterior is improper otherwise"
    )]
    SingleClassResponse { zeros: usize, ones: usize },

    #[error("generated response was single-class in all {attempts} attempts")]
    DegenerateResponse { attempts: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
