//! Degree sparsifier: every node selects up to `ceil(sqrt(m̂)/ε)` of its
//! edges, and `G′` keeps the edges selected by both endpoints.

use std::collections::{BTreeSet, HashMap};

use crate::error::{invalid, Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, UpdateEvent, UpdateKind};

#[derive(Debug, Clone, Copy)]
struct EdgeInfo {
    seq: u64,
    // selected by the smaller / larger endpoint
    sel: [bool; 2],
}

#[derive(Debug, Clone)]
pub struct SparsifiedView {
    eps: f64,
    m_hat: usize,
    cap: usize,
    seq: u64,
    edges: HashMap<(NodeId, NodeId), EdgeInfo>,
    selected: Vec<BTreeSet<(u64, NodeId)>>,
    unselected: Vec<BTreeSet<(u64, NodeId)>>,
    sparse: DynamicGraph,
    ops: u64,
}

impl SparsifiedView {
    pub fn capacity_for(m_hat: usize, eps: f64) -> usize {
        ((m_hat.max(1) as f64).sqrt() / eps).ceil() as usize
    }

    pub fn new(n: usize, eps: f64, m_hat: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("eps", format!("{eps} not in (0, 1)")));
        }
        Ok(SparsifiedView {
            eps,
            m_hat,
            cap: Self::capacity_for(m_hat, eps),
            seq: 0,
            edges: HashMap::new(),
            selected: vec![BTreeSet::new(); n],
            unselected: vec![BTreeSet::new(); n],
            sparse: DynamicGraph::new(n),
            ops: 0,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn m_hat(&self) -> usize {
        self.m_hat
    }

    /// Per-node selection capacity.
    pub fn capacity(&self) -> usize {
        self.cap
    }

    /// The sparsified graph `G′`.
    pub fn sparse(&self) -> &DynamicGraph {
        &self.sparse
    }

    /// Number of edges of `G`.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn ops(&self) -> u64 {
        self.ops + self.sparse.ops()
    }

    pub fn selects(&self, x: NodeId, y: NodeId) -> bool {
        self.edges
            .get(&key(x, y))
            .is_some_and(|e| e.sel[usize::from(x > y)])
    }

    /// Apply one update to `G` and return the induced updates to `G′`.
    pub fn update(&mut self, ev: &UpdateEvent) -> Result<Vec<UpdateEvent>> {
        let n = self.selected.len();
        for x in [ev.u, ev.v] {
            if x as usize >= n {
                return Err(Error::NodeOutOfRange { node: x, n });
            }
        }
        if ev.u == ev.v {
            return Err(Error::SelfLoop(ev.u));
        }
        let k = key(ev.u, ev.v);
        let mut out = Vec::new();
        match ev.kind {
            UpdateKind::Insert => {
                if self.edges.contains_key(&k) {
                    return Err(Error::DuplicateEdge(k.0, k.1));
                }
                self.seq += 1;
                let seq = self.seq;
                let mut sel = [false; 2];
                for (side, (x, y)) in [(k.0, k.1), (k.1, k.0)].into_iter().enumerate() {
                    let xi = x as usize;
                    self.ops += 1;
                    if self.selected[xi].len() < self.cap {
                        self.selected[xi].insert((seq, y));
                        sel[side] = true;
                    } else {
                        self.unselected[xi].insert((seq, y));
                    }
                }
                self.edges.insert(k, EdgeInfo { seq, sel });
                if sel == [true, true] {
                    self.sparse.insert_edge(k.0, k.1)?;
                    out.push(UpdateEvent::insert(k.0, k.1));
                }
            }
            UpdateKind::Delete => {
                let info = self.edges.remove(&k).ok_or(Error::MissingEdge(k.0, k.1))?;
                if info.sel == [true, true] {
                    self.sparse.delete_edge(k.0, k.1)?;
                    out.push(UpdateEvent::delete(k.0, k.1));
                }
                for (side, (x, y)) in [(k.0, k.1), (k.1, k.0)].into_iter().enumerate() {
                    let xi = x as usize;
                    self.ops += 1;
                    if !info.sel[side] {
                        self.unselected[xi].remove(&(info.seq, y));
                        continue;
                    }
                    self.selected[xi].remove(&(info.seq, y));
                    // promote the most recently inserted unselected edge
                    if let Some((s, w)) = self.unselected[xi].pop_last() {
                        self.selected[xi].insert((s, w));
                        self.ops += 1;
                        let e = self.edges.get_mut(&key(x, w)).expect("listed edge");
                        e.sel[usize::from(x > w)] = true;
                        if e.sel == [true, true] {
                            let (a, b) = key(x, w);
                            self.sparse.insert_edge(a, b)?;
                            out.push(UpdateEvent::insert(a, b));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Check the selection invariants against the stored edge set.
    pub fn check(&self) -> std::result::Result<(), String> {
        for (x, (sel, unsel)) in self.selected.iter().zip(&self.unselected).enumerate() {
            if sel.len() > self.cap {
                return Err(format!("node {x} selects {} > {}", sel.len(), self.cap));
            }
            if !unsel.is_empty() && sel.len() < self.cap {
                return Err(format!("node {x} below capacity with unselected edges"));
            }
        }
        for (&(a, b), e) in &self.edges {
            if (e.sel == [true, true]) != self.sparse.has_edge(a, b) {
                return Err(format!("edge ({a}, {b}) mismatched in the sparse graph"));
            }
        }
        if self.sparse.m() > self.edges.len() {
            return Err("sparse graph has extra edges".into());
        }
        Ok(())
    }
}
