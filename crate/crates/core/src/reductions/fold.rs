//! Unfolding a weighted graph into an unweighted one and refolding
//! subgraphs back.
//!
//! `φ(G)` has copies `u^1..u^{W_u}` of each node, `W_u` the largest weight
//! at `u`, and for an edge `(u, v)` of weight `w` the edges
//! `(u^i, v^{w-i+1})`, `i = 1..=w`. Refolding uses the same index pairing.

use std::collections::BTreeSet;

use crate::error::{invalid, Error, Result};
use crate::graph::{key, NodeId};

pub type WeightedEdge = (NodeId, NodeId, u64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedGraph {
    n: usize,
    source: Vec<WeightedEdge>,
    /// First unfolded id of each node's copies.
    offset: Vec<NodeId>,
    /// Number of copies of each node.
    copies: Vec<u64>,
    edges: Vec<(NodeId, NodeId)>,
}

/// Build `φ(G)`. Weights must be at least one; parallel edges and loops are
/// rejected.
pub fn unfold_graph(n: usize, edges: &[WeightedEdge]) -> Result<FoldedGraph> {
    let mut copies = vec![0u64; n];
    let mut seen = BTreeSet::new();
    for &(u, v, w) in edges {
        for x in [u, v] {
            if x as usize >= n {
                return Err(Error::NodeOutOfRange { node: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if w == 0 {
            return Err(invalid("weight", format!("edge ({u}, {v}) has weight 0")));
        }
        if !seen.insert(key(u, v)) {
            return Err(Error::DuplicateEdge(u.min(v), u.max(v)));
        }
        copies[u as usize] = copies[u as usize].max(w);
        copies[v as usize] = copies[v as usize].max(w);
    }
    let mut offset = Vec::with_capacity(n);
    let mut next: u64 = 0;
    for &c in &copies {
        offset.push(next as NodeId);
        next += c;
    }
    if next > NodeId::MAX as u64 {
        return Err(invalid("weight", "unfolded graph too large"));
    }
    let mut out = Vec::new();
    for &(u, v, w) in edges {
        for i in 1..=w {
            let a = offset[u as usize] + (i - 1) as NodeId;
            let b = offset[v as usize] + (w - i) as NodeId;
            out.push(key(a, b));
        }
    }
    Ok(FoldedGraph {
        n,
        source: edges.to_vec(),
        offset,
        copies,
        edges: out,
    })
}

impl FoldedGraph {
    /// Nodes of the source graph.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nodes of `φ(G)`.
    pub fn node_count(&self) -> usize {
        self.copies.iter().sum::<u64>() as usize
    }

    /// Edges of `φ(G)` as unfolded ids.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn source(&self) -> &[WeightedEdge] {
        &self.source
    }

    /// Unfolded id of `u^i`, `i` 1-based.
    pub fn copy_id(&self, u: NodeId, i: u64) -> Option<NodeId> {
        let c = *self.copies.get(u as usize)?;
        (1..=c)
            .contains(&i)
            .then(|| self.offset[u as usize] + (i - 1) as NodeId)
    }

    /// Source node and 1-based copy index of an unfolded id.
    pub fn origin(&self, x: NodeId) -> Option<(NodeId, u64)> {
        let u = self.offset.partition_point(|&o| o <= x).checked_sub(1)?;
        let i = (x - self.offset[u]) as u64 + 1;
        (i <= self.copies[u]).then_some((u as NodeId, i))
    }

    /// `R(H)`: source edges with at least one unfolded copy in `h`.
    pub fn refold(&self, h: &[(NodeId, NodeId)]) -> Result<Vec<WeightedEdge>> {
        let all: BTreeSet<_> = self.edges.iter().copied().collect();
        let mut hit = BTreeSet::new();
        for &(a, b) in h {
            if !all.contains(&key(a, b)) {
                return Err(Error::MissingEdge(a.min(b), a.max(b)));
            }
            let (u, _) = self.origin(a).unwrap();
            let (v, _) = self.origin(b).unwrap();
            hit.insert(key(u, v));
        }
        Ok(self
            .source
            .iter()
            .copied()
            .filter(|&(u, v, _)| hit.contains(&key(u, v)))
            .collect())
    }
}
