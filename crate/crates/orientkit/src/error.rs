use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop at node {u} is not allowed here")]
    SelfLoop { u: usize },
    #[error("negative cost on edge {u}-{v}")]
    NegativeCost { u: usize, v: usize },
    #[error("operation requires a purely undirected graph (no arcs)")]
    NotUndirected,
    #[error("operation requires a digraph (no undirected edges)")]
    NotDigraph,
    #[error("graph has undirected edges but no orientation was supplied")]
    MissingOrientation,
    #[error("orientation covers {got} edges but the graph has {expected}")]
    OrientationDomainMismatch { got: usize, expected: usize },
    #[error("input graph is not a forest")]
    NotAForest,
    #[error("input graph is not a tree")]
    NotATree,
    #[error("node set is not 2-edge-connected: edge {edge} is a bridge inside it")]
    ComponentHasBridge { edge: usize },
    #[error("node set does not induce a connected subgraph")]
    ComponentDisconnected,
    #[error("terminals must be distinct, got {s} twice")]
    IdenticalTerminals { s: usize },
    #[error("pair ({s},{t}) spans two connected components")]
    PairDisconnected { s: usize, t: usize },
    #[error("edge count {edges} exceeds the enumeration cap {cap}")]
    EdgeCapExceeded { edges: usize, cap: usize },
    #[error("pair count {pairs} exceeds cap {cap}")]
    PairCapExceeded { pairs: usize, cap: usize },
    #[error("pair ({s},{t}) does not route through the centroid")]
    PairNotThroughCentroid { s: usize, t: usize },
    #[error("no subgraph can connect pair ({s},{t})")]
    InfeasiblePair { s: usize, t: usize },
    #[error("violated set {witness:?} has no crossing candidate edge")]
    InfeasibleCover { witness: Vec<usize> },
    #[error("edge set does not cover the demand cuts; witness set {witness:?}")]
    CoverViolated { witness: Vec<usize> },
    #[error("maximum flow {max_flow} is below the required value {required}")]
    InfeasibleFlow { max_flow: i64, required: i64 },
    #[error("orientation search over {edges} edges exceeds cap {cap}")]
    OrientationCapExceeded { edges: usize, cap: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
