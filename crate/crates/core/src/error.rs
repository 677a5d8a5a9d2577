use crate::graph::NodeId;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(NodeId, NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(NodeId, NodeId),
    #[error("node {0} has no neighbors")]
    EmptyNeighborhood(NodeId),
    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("degree bound {bound} exceeded at node {node}")]
    DegreeBound { node: NodeId, bound: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("not a matching: {0}")]
    NotAMatching(String),
    #[error("not a maximum matching: {0}")]
    NotMaximum(String),
    #[error("star violates bipartition at leaf {0}")]
    Bipartition(NodeId),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
