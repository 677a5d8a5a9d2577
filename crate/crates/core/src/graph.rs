//! Dynamic simple graph on a fixed node set.
//!
//! Every node keeps its neighbors in a cyclic doubly-linked ring with a
//! movable cursor. Both ring and edge updates are O(1).

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub type NodeId = u32;

pub(crate) const NIL: usize = usize::MAX;

/// Normalized undirected edge key, smaller endpoint first.
#[inline]
pub fn key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UpdateKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UpdateEvent {
    pub kind: UpdateKind,
    pub u: NodeId,
    pub v: NodeId,
}

impl UpdateEvent {
    pub fn insert(u: NodeId, v: NodeId) -> Self {
        UpdateEvent {
            kind: UpdateKind::Insert,
            u,
            v,
        }
    }

    pub fn delete(u: NodeId, v: NodeId) -> Self {
        UpdateEvent {
            kind: UpdateKind::Delete,
            u,
            v,
        }
    }
}

impl fmt::Display for UpdateEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.kind {
            UpdateKind::Insert => '+',
            UpdateKind::Delete => '-',
        };
        write!(f, "{} {} {}", c, self.u, self.v)
    }
}

/// All edges between `center` and `leaves` inserted or deleted at once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarUpdate {
    pub kind: UpdateKind,
    pub center: NodeId,
    pub leaves: Vec<NodeId>,
}

impl StarUpdate {
    pub fn validate(&self) -> Result<()> {
        if self.leaves.is_empty() {
            return Err(crate::error::invalid("star", "no leaves"));
        }
        let mut seen = self.leaves.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.leaves.len() {
            return Err(crate::error::invalid("star", "repeated leaf"));
        }
        if seen.binary_search(&self.center).is_ok() {
            return Err(Error::SelfLoop(self.center));
        }
        Ok(())
    }
}

/// Parse the `+ u v` / `- u v` stream format. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_stream(text: &str) -> Result<Vec<UpdateEvent>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: i + 1,
            msg: msg.to_string(),
        };
        let mut it = line.split_whitespace();
        let kind = match it.next() {
            Some("+") => UpdateKind::Insert,
            Some("-") => UpdateKind::Delete,
            _ => return Err(bad("expected '+' or '-'")),
        };
        let u: NodeId = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad first node id"))?;
        let v: NodeId = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad second node id"))?;
        if it.next().is_some() {
            return Err(bad("trailing tokens"));
        }
        out.push(UpdateEvent { kind, u, v });
    }
    Ok(out)
}

pub fn format_stream(events: &[UpdateEvent]) -> String {
    let mut s = String::with_capacity(events.len() * 10);
    for e in events {
        s.push_str(&e.to_string());
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone)]
pub struct DynamicGraph {
    n: usize,
    index: HashMap<(NodeId, NodeId), usize>,
    ends: Vec<(NodeId, NodeId)>,
    live: Vec<bool>,
    free: Vec<usize>,
    // Ring links over half-edge slots: slot 2e sits in the ring of ends[e].0,
    // slot 2e+1 in the ring of ends[e].1.
    next: Vec<usize>,
    prev: Vec<usize>,
    cursor: Vec<usize>,
    deg: Vec<usize>,
    m: usize,
    ops: u64,
}

impl DynamicGraph {
    pub fn new(n: usize) -> Self {
        DynamicGraph {
            n,
            index: HashMap::new(),
            ends: Vec::new(),
            live: Vec::new(),
            free: Vec::new(),
            next: Vec::new(),
            prev: Vec::new(),
            cursor: vec![NIL; n],
            deg: vec![0; n],
            m: 0,
            ops: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.deg[v as usize]
    }

    pub fn max_degree(&self) -> usize {
        self.deg.iter().copied().max().unwrap_or(0)
    }

    /// Elementary operations performed so far (cumulative).
    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.index.contains_key(&key(u, v))
    }

    pub fn edge_id(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.index.get(&key(u, v)).copied()
    }

    /// Upper bound on edge ids handed out so far.
    pub fn edge_capacity(&self) -> usize {
        self.ends.len()
    }

    pub fn endpoints(&self, e: usize) -> Option<(NodeId, NodeId)> {
        if e < self.ends.len() && self.live[e] {
            Some(self.ends[e])
        } else {
            None
        }
    }

    fn check_node(&self, v: NodeId) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: v, n: self.n })
        }
    }

    #[inline]
    fn slot_neighbor(&self, slot: usize) -> NodeId {
        let (a, b) = self.ends[slot / 2];
        if slot % 2 == 0 {
            b
        } else {
            a
        }
    }

    #[inline]
    fn slot_in_ring_of(&self, e: usize, v: NodeId) -> usize {
        if self.ends[e].0 == v {
            2 * e
        } else {
            2 * e + 1
        }
    }

    fn link_before_cursor(&mut self, v: NodeId, slot: usize) {
        let c = self.cursor[v as usize];
        if c == NIL {
            self.next[slot] = slot;
            self.prev[slot] = slot;
            self.cursor[v as usize] = slot;
        } else {
            let p = self.prev[c];
            self.next[p] = slot;
            self.prev[slot] = p;
            self.next[slot] = c;
            self.prev[c] = slot;
        }
        self.ops += 1;
    }

    fn unlink(&mut self, v: NodeId, slot: usize) {
        let nx = self.next[slot];
        if nx == slot {
            self.cursor[v as usize] = NIL;
        } else {
            let p = self.prev[slot];
            self.next[p] = nx;
            self.prev[nx] = p;
            if self.cursor[v as usize] == slot {
                self.cursor[v as usize] = p;
            }
        }
        self.next[slot] = NIL;
        self.prev[slot] = NIL;
        self.ops += 1;
    }

    /// Insert `(u, v)`; each endpoint lands immediately before the other's
    /// cursor. Returns the edge id.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let k = key(u, v);
        if self.index.contains_key(&k) {
            return Err(Error::DuplicateEdge(k.0, k.1));
        }
        let e = match self.free.pop() {
            Some(e) => {
                self.ends[e] = k;
                self.live[e] = true;
                e
            }
            None => {
                self.ends.push(k);
                self.live.push(true);
                self.next.extend([NIL, NIL]);
                self.prev.extend([NIL, NIL]);
                self.ends.len() - 1
            }
        };
        self.index.insert(k, e);
        self.link_before_cursor(k.0, 2 * e);
        self.link_before_cursor(k.1, 2 * e + 1);
        self.deg[u as usize] += 1;
        self.deg[v as usize] += 1;
        self.m += 1;
        self.ops += 1;
        Ok(e)
    }

    /// Delete `(u, v)`; a cursor on the removed element steps back to its
    /// predecessor, so the next advance lands on the old successor.
    /// Returns the (now free) edge id.
    pub fn delete_edge(&mut self, u: NodeId, v: NodeId) -> Result<usize> {
        self.check_node(u)?;
        self.check_node(v)?;
        let k = key(u, v);
        let e = self.index.remove(&k).ok_or(Error::MissingEdge(k.0, k.1))?;
        self.unlink(k.0, 2 * e);
        self.unlink(k.1, 2 * e + 1);
        self.live[e] = false;
        self.free.push(e);
        self.deg[u as usize] -= 1;
        self.deg[v as usize] -= 1;
        self.m -= 1;
        self.ops += 1;
        Ok(e)
    }

    /// Move `ptr(v)` one step along the ring and return the neighbor it now
    /// addresses.
    pub fn advance_cursor(&mut self, v: NodeId) -> Result<NodeId> {
        self.check_node(v)?;
        let c = self.cursor[v as usize];
        if c == NIL {
            return Err(Error::EmptyNeighborhood(v));
        }
        let nx = self.next[c];
        self.cursor[v as usize] = nx;
        self.ops += 1;
        Ok(self.slot_neighbor(nx))
    }

    /// Neighbor currently addressed by `ptr(v)`.
    pub fn cursor(&self, v: NodeId) -> Option<NodeId> {
        let c = self.cursor[v as usize];
        (c != NIL).then(|| self.slot_neighbor(c))
    }

    /// Ring contents of `v`, starting at the cursor.
    pub fn neighbors(&self, v: NodeId) -> Neighbors<'_> {
        let start = self.cursor[v as usize];
        Neighbors {
            g: self,
            start,
            at: start,
        }
    }

    /// Neighbor following `w` in `v`'s ring (requires edge `(v, w)`).
    pub fn ring_next(&self, v: NodeId, w: NodeId) -> Option<NodeId> {
        let e = self.edge_id(v, w)?;
        let s = self.slot_in_ring_of(e, v);
        Some(self.slot_neighbor(self.next[s]))
    }

    /// Live edges in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.ends
            .iter()
            .zip(self.live.iter())
            .filter(|(_, l)| **l)
            .map(|(k, _)| *k)
    }

    pub fn apply(&mut self, ev: &UpdateEvent) -> Result<usize> {
        match ev.kind {
            UpdateKind::Insert => self.insert_edge(ev.u, ev.v),
            UpdateKind::Delete => self.delete_edge(ev.u, ev.v),
        }
    }
}

pub struct Neighbors<'a> {
    g: &'a DynamicGraph,
    start: usize,
    at: usize,
}

impl Iterator for Neighbors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        if self.at == NIL {
            return None;
        }
        let out = self.g.slot_neighbor(self.at);
        self.at = self.g.next[self.at];
        if self.at == self.start {
            self.at = NIL;
        }
        Some(out)
    }
}
