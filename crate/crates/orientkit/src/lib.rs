//! Orientation toolkit for mixed multigraphs.
//!
//! Everything revolves around one question: given a graph whose edges may be
//! oriented either way (plus some pre-directed arcs), which demand pairs
//! `(s, t)` can be granted a directed `s -> t` path, and at what cost? The
//! modules build up from plain graph plumbing to the four solvers exposed at
//! the crate root.

pub mod connectivity;
pub mod disjoint;
pub mod error;
mod flow;
pub mod graph;
pub mod kernel;
pub mod lca;
pub mod maxpairs;
pub mod mixed;
pub mod search;
pub mod steiner;

pub use error::{Error, Result};
pub use graph::{
    satisfied_pair_indices, satisfied_pairs, topological_order, Arc, EdgeDir, MixedGraph,
    Orientation, PairList, TopologicalOrder, UndirectedEdge,
};
