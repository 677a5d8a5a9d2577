//! Matchings as mate arrays, plus the neighbor-access trait shared by the
//! augmenting-path engine.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{key, DynamicGraph, NodeId};

pub const FREE: NodeId = NodeId::MAX;

/// Read-only neighbor access for matching algorithms.
pub trait Adjacency {
    fn node_count(&self) -> usize;
    fn neighbors_into(&self, v: NodeId, out: &mut Vec<NodeId>);
}

impl Adjacency for DynamicGraph {
    fn node_count(&self) -> usize {
        self.n()
    }

    fn neighbors_into(&self, v: NodeId, out: &mut Vec<NodeId>) {
        out.extend(self.neighbors(v));
    }
}

/// Plain adjacency lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdjList {
    pub adj: Vec<Vec<NodeId>>,
}

impl AdjList {
    pub fn new(n: usize) -> Self {
        AdjList {
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut g = AdjList::new(n);
        for &(u, v) in edges {
            g.add(u, v);
        }
        g
    }

    pub fn add(&mut self, u: NodeId, v: NodeId) {
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if (u as NodeId) < v {
                    out.push((u as NodeId, v));
                }
            }
        }
        out
    }
}

impl Adjacency for AdjList {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors_into(&self, v: NodeId, out: &mut Vec<NodeId>) {
        out.extend_from_slice(&self.adj[v as usize]);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    mate: Vec<NodeId>,
    size: usize,
}

impl Matching {
    pub fn new(n: usize) -> Self {
        Matching {
            mate: vec![FREE; n],
            size: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut m = Matching::new(n);
        for &(u, v) in edges {
            if u == v || u as usize >= n || v as usize >= n {
                return Err(Error::NotAMatching(format!("bad edge ({u}, {v})")));
            }
            if !m.is_free(u) || !m.is_free(v) {
                return Err(Error::NotAMatching(format!("edge ({u}, {v}) shares an endpoint")));
            }
            m.add(u, v);
        }
        Ok(m)
    }

    pub(crate) fn from_mates(mate: Vec<NodeId>) -> Self {
        let size = mate
            .iter()
            .enumerate()
            .filter(|&(v, &w)| w != FREE && (v as NodeId) < w)
            .count();
        Matching { mate, size }
    }

    pub fn n(&self) -> usize {
        self.mate.len()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn mate(&self, v: NodeId) -> Option<NodeId> {
        let w = self.mate[v as usize];
        (w != FREE).then_some(w)
    }

    pub fn is_free(&self, v: NodeId) -> bool {
        self.mate[v as usize] == FREE
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.mate[u as usize] == v
    }

    pub(crate) fn mates(&self) -> &[NodeId] {
        &self.mate
    }

    pub fn add(&mut self, u: NodeId, v: NodeId) {
        assert!(self.is_free(u) && self.is_free(v), "endpoint already matched");
        self.mate[u as usize] = v;
        self.mate[v as usize] = u;
        self.size += 1;
    }

    pub fn remove(&mut self, u: NodeId, v: NodeId) -> bool {
        if self.mate[u as usize] != v {
            return false;
        }
        self.mate[u as usize] = FREE;
        self.mate[v as usize] = FREE;
        self.size -= 1;
        true
    }

    /// Edges in ascending order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.mate
            .iter()
            .enumerate()
            .filter(|&(v, &w)| w != FREE && (v as NodeId) < w)
            .map(|(v, &w)| (v as NodeId, w))
            .collect()
    }

    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges().into_iter().collect()
    }

    /// Every matched pair is an edge according to `has_edge`.
    pub fn is_valid_in(&self, has_edge: impl Fn(NodeId, NodeId) -> bool) -> bool {
        self.mate.iter().enumerate().all(|(v, &w)| {
            w == FREE || (self.mate[w as usize] == v as NodeId && has_edge(v as NodeId, w))
        })
    }
}

/// Greedy maximal matching, scanning edges in the given order.
pub fn greedy_maximal(n: usize, edges: &[(NodeId, NodeId)]) -> Matching {
    let mut m = Matching::new(n);
    for &(u, v) in edges {
        if u != v && m.is_free(u) && m.is_free(v) {
            m.add(u, v);
        }
    }
    m
}

/// Check that `edges` forms a matching (no shared endpoints, no loops).
pub fn check_is_matching(edges: &[(NodeId, NodeId)]) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut uniq = BTreeSet::new();
    for &(u, v) in edges {
        if u == v {
            return Err(Error::NotAMatching(format!("self-loop at {u}")));
        }
        if !uniq.insert(key(u, v)) {
            continue;
        }
        if !seen.insert(u) || !seen.insert(v) {
            return Err(Error::NotAMatching(format!("edge ({u}, {v}) shares an endpoint")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_remove() {
        let mut m = Matching::new(4);
        m.add(0, 1);
        m.add(3, 2);
        assert_eq!(m.edges(), vec![(0, 1), (2, 3)]);
        assert!(m.remove(1, 0));
        assert!(!m.remove(1, 0));
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn from_edges_rejects_overlap() {
        assert!(Matching::from_edges(3, &[(0, 1), (1, 2)]).is_err());
        assert!(check_is_matching(&[(0, 1), (1, 2)]).is_err());
        assert!(check_is_matching(&[(0, 1), (2, 3)]).is_ok());
    }

    #[test]
    fn greedy_is_maximal() {
        let m = greedy_maximal(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(m.edges(), vec![(0, 1), (2, 3)]);
    }
}
