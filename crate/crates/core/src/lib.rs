pub mod bipartite;
pub mod blossom;
pub mod degrees;
pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod kernel;
mod lists;
pub mod matching;
pub mod oracle;
pub mod orientation;
pub mod pipeline;
pub mod recourse;
pub mod reductions;
pub mod stability;

pub use error::{Error, Result};
pub use graph::{DynamicGraph, NodeId, StarUpdate, UpdateEvent, UpdateKind};
pub use matching::{AdjList, Matching};
