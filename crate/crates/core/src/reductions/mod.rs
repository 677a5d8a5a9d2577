//! Reduction devices: degree sparsification, the bipartite double and
//! weighted unfolding.

pub mod doubling;
pub mod fold;
pub mod sparsify;

pub use doubling::DoubledView;
pub use fold::{unfold_graph, FoldedGraph, WeightedEdge};
pub use sparsify::SparsifiedView;
