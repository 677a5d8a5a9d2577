//! Ground-truth matching oracles: exact maximum matching for general graphs,
//! exhaustive enumeration for cross-checking, maximum weight matching for
//! small instances, and an incrementally maintained maximum matching for
//! per-step sweeps over a dynamic stream.

use std::collections::HashMap;

use crate::blossom::{maximum_matching, Roots, Search};
use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, NodeId, UpdateEvent, UpdateKind};
use crate::matching::{Adjacency, AdjList, Matching, FREE};

/// Exact maximum matching.
pub fn max_matching<A: Adjacency + ?Sized>(g: &A) -> Matching {
    Matching::from_mates(maximum_matching(g))
}

/// Size of a maximum matching of an edge list.
pub fn mu(n: usize, edges: &[(NodeId, NodeId)]) -> usize {
    max_matching(&AdjList::from_edges(n, edges)).len()
}

/// Maximum matching size by exhaustive branching. Intended for n ≤ 64 and
/// sparse inputs only.
pub fn exhaustive_max_matching(n: usize, edges: &[(NodeId, NodeId)]) -> usize {
    assert!(n <= 64, "exhaustive oracle supports at most 64 nodes");
    let mut nbr = vec![0u64; n];
    for &(u, v) in edges {
        if u != v {
            nbr[u as usize] |= 1 << v;
            nbr[v as usize] |= 1 << u;
        }
    }
    fn go(mask: u64, nbr: &[u64], memo: &mut HashMap<u64, usize>) -> usize {
        let mut mask = mask;
        // drop vertices with no live neighbor
        loop {
            if mask == 0 {
                return 0;
            }
            let v = mask.trailing_zeros() as usize;
            if nbr[v] & mask == 0 {
                mask &= !(1 << v);
            } else {
                break;
            }
        }
        if let Some(&r) = memo.get(&mask) {
            return r;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut best = go(rest, nbr, memo);
        let mut cand = nbr[v] & rest;
        while cand != 0 {
            let u = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            best = best.max(1 + go(rest & !(1 << u), nbr, memo));
        }
        memo.insert(mask, best);
        best
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    go(full, &nbr, &mut HashMap::new())
}

/// Maximum weight matching value by exhaustive branching over vertices.
/// Weights must be positive; intended for n ≤ ~20.
pub fn mwm(n: usize, edges: &[(NodeId, NodeId, u64)]) -> Result<u64> {
    if n > 64 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "weighted oracle supports at most 64 nodes".into(),
        });
    }
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        if w == 0 {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: format!("edge ({u}, {v}) has non-positive weight"),
            });
        }
        if u as usize >= n || v as usize >= n {
            return Err(Error::NodeOutOfRange {
                node: u.max(v),
                n,
            });
        }
        if u != v {
            adj[u as usize].push((v as usize, w));
            adj[v as usize].push((u as usize, w));
        }
    }
    fn go(mask: u64, adj: &[Vec<(usize, u64)>], memo: &mut HashMap<u64, u64>) -> u64 {
        if mask == 0 {
            return 0;
        }
        if let Some(&r) = memo.get(&mask) {
            return r;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut best = go(rest, adj, memo);
        for &(u, w) in &adj[v] {
            if rest & (1 << u) != 0 {
                best = best.max(w + go(rest & !(1 << u), adj, memo));
            }
        }
        memo.insert(mask, best);
        best
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    Ok(go(full, &adj, &mut HashMap::new()))
}

/// A maximum matching of a dynamic graph kept current with one augmenting
/// search per update.
#[derive(Debug, Clone)]
pub struct IncrementalOracle {
    graph: DynamicGraph,
    mate: Vec<NodeId>,
    size: usize,
    search: Search,
}

impl IncrementalOracle {
    pub fn new(n: usize) -> Self {
        IncrementalOracle {
            graph: DynamicGraph::new(n),
            mate: vec![FREE; n],
            size: 0,
            search: Search::new(),
        }
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    /// Current maximum matching size.
    pub fn mu(&self) -> usize {
        self.size
    }

    pub fn matching(&self) -> Matching {
        Matching::from_mates(self.mate.clone())
    }

    pub fn apply(&mut self, ev: &UpdateEvent) -> Result<()> {
        self.graph.apply(ev)?;
        let (u, v) = (ev.u as usize, ev.v as usize);
        match ev.kind {
            UpdateKind::Insert => {
                if self.mate[u] == FREE && self.mate[v] == FREE {
                    self.mate[u] = ev.v;
                    self.mate[v] = ev.u;
                    self.size += 1;
                    return Ok(());
                }
            }
            UpdateKind::Delete => {
                if self.mate[u] != ev.v {
                    return Ok(());
                }
                self.mate[u] = FREE;
                self.mate[v] = FREE;
                self.size -= 1;
            }
        }
        if self.search.augment(&self.graph, &mut self.mate, Roots::AllFree) {
            self.size += 1;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn petersen() -> Vec<(NodeId, NodeId)> {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((i, i + 5));
            e.push((i + 5, (i + 2) % 5 + 5));
        }
        e
    }

    #[test]
    fn odd_cycle() {
        let c5: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        assert_eq!(mu(5, &c5), 2);
        assert_eq!(exhaustive_max_matching(5, &c5), 2);
    }

    #[test]
    fn petersen_is_perfect() {
        let e = petersen();
        let m = max_matching(&AdjList::from_edges(10, &e));
        assert_eq!(m.len(), 5);
        assert!(m.is_valid_in(|a, b| e.contains(&(a, b)) || e.contains(&(b, a))));
    }

    #[test]
    fn blossom_needed() {
        // triangle 0-1-2 with tails 2-3 and 0-4; greedy may pick (0,1)
        let e = [(0, 1), (1, 2), (2, 0), (2, 3), (0, 4), (3, 5)];
        assert_eq!(mu(6, &e), 3);
    }

    #[test]
    fn random_against_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(1..=30usize);
            let p = rng.gen_range(0.02..0.3);
            let mut e = Vec::new();
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    if rng.gen_bool(p) {
                        e.push((u, v));
                    }
                }
            }
            let g = AdjList::from_edges(n, &e);
            let m = max_matching(&g);
            assert!(m.is_valid_in(|a, b| g.adj[a as usize].contains(&b)));
            assert_eq!(m.len(), exhaustive_max_matching(n, &e), "edges {e:?}");
        }
    }

    #[test]
    fn weighted() {
        assert_eq!(mwm(2, &[(0, 1, 7)]).unwrap(), 7);
        assert_eq!(mwm(3, &[(0, 1, 3), (1, 2, 3), (0, 2, 5)]).unwrap(), 5);
        assert!(mwm(2, &[(0, 1, 0)]).is_err());
        assert_eq!(mwm(4, &[(0, 1, 2), (1, 2, 5), (2, 3, 2)]).unwrap(), 5);
        assert_eq!(mwm(4, &[(0, 1, 3), (1, 2, 5), (2, 3, 3)]).unwrap(), 6);
    }

    #[test]
    fn weighted_unit_equals_cardinality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..=12usize);
            let mut e = Vec::new();
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    if rng.gen_bool(0.3) {
                        e.push((u, v));
                    }
                }
            }
            let we: Vec<_> = e.iter().map(|&(u, v)| (u, v, 1)).collect();
            assert_eq!(mwm(n, &we).unwrap() as usize, mu(n, &e));
        }
    }

    #[test]
    fn incremental_tracks_static() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40;
        let mut o = IncrementalOracle::new(n);
        let mut live: Vec<(NodeId, NodeId)> = Vec::new();
        for _ in 0..3000 {
            let ev = if !live.is_empty() && rng.gen_bool(0.45) {
                let i = rng.gen_range(0..live.len());
                let (u, v) = live.swap_remove(i);
                UpdateEvent::delete(u, v)
            } else {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                if u == v || o.graph().has_edge(u, v) {
                    continue;
                }
                live.push((u, v));
                UpdateEvent::insert(u, v)
            };
            o.apply(&ev).unwrap();
            assert_eq!(o.mu(), mu(n, &live));
            assert!(o.matching().is_valid_in(|a, b| o.graph().has_edge(a, b)));
        }
    }
}
