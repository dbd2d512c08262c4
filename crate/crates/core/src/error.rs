use thiserror::Error;

use crate::graph::{EdgeId, NodeId};

pub type Result<T> = std::result::Result<T, UmeError>;

#[derive(Debug, Error)]
pub enum UmeError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node {0} does not exist")]
    MissingNode(NodeId),

    #[error("edge {0} does not exist")]
    MissingEdge(EdgeId),

    #[error("no edge from {tail} to {head}")]
    NoSuchArc { tail: NodeId, head: NodeId },

    #[error("invalid evader {index}: {reason}")]
    InvalidEvader { index: usize, reason: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-absorbing chain: {0}")]
    NonAbsorbing(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("acyclic required: chain contains a cycle through node {0}")]
    Cycle(NodeId),

    #[error("path enumeration exceeded the limit of {0} paths")]
    PathLimit(usize),

    #[error("{count} combinations exceed the limit of {limit}")]
    CombinationLimit { count: u128, limit: u128 },

    #[error("lp parse error at line {line}: {reason}")]
    LpParse { line: usize, reason: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl UmeError {
    /// True for failures of the linear algebra or of a numerical postcondition,
    /// as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, UmeError::NonAbsorbing(_) | UmeError::Numerical(_))
    }
}
