//! General graphs through a bipartite matcher on the bipartite double.
//!
//! Every edge `(u, v)` becomes `(u¹, v²)` and `(u², v¹)`. The matching `M′`
//! kept on the double defines `X_uv ∈ {0, ½, 1}`, the number of copies of
//! `(u, v)` in `M′` halved. The support of `X` has maximum degree two, so it
//! is a union of paths and cycles, and the output is a maximum matching of
//! that support.

use std::collections::HashMap;

use crate::bipartite::BipartiteMatcher;
use crate::error::{Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, UpdateEvent, UpdateKind};
use crate::matching::{Matching, FREE};

#[derive(Debug, Clone)]
pub struct DoubledView {
    n: usize,
    graph: DynamicGraph,
    inner: BipartiteMatcher,
    copies: HashMap<(NodeId, NodeId), u8>,
    support: Vec<[NodeId; 2]>,
    support_m: usize,
    mate: Vec<NodeId>,
    size: usize,
    ops: u64,
}

impl DoubledView {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        Ok(DoubledView {
            n,
            graph: DynamicGraph::new(n),
            inner: BipartiteMatcher::new(2 * n, eps)?,
            copies: HashMap::new(),
            support: vec![[FREE, FREE]; n],
            support_m: 0,
            mate: vec![FREE; n],
            size: 0,
            ops: 0,
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn inner(&self) -> &BipartiteMatcher {
        &self.inner
    }

    pub fn ops(&self) -> u64 {
        self.ops + self.graph.ops() + self.inner.ops()
    }

    /// `2·X_uv`.
    pub fn x2(&self, u: NodeId, v: NodeId) -> u8 {
        self.copies.get(&key(u, v)).copied().unwrap_or(0)
    }

    /// Edges of the support of `X`, ascending.
    pub fn support_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut e: Vec<_> = self.copies.keys().copied().collect();
        e.sort_unstable();
        e
    }

    pub fn support_len(&self) -> usize {
        self.support_m
    }

    pub fn output(&self) -> Matching {
        let mut m = Matching::new(self.n);
        for (v, &w) in self.mate.iter().enumerate() {
            if w != FREE && (v as NodeId) < w {
                m.add(v as NodeId, w);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn update(&mut self, ev: &UpdateEvent) -> Result<Vec<UpdateEvent>> {
        self.graph.apply(ev)?;
        let n = self.n as NodeId;
        let (u, v) = (ev.u, ev.v);
        let mut inner_changes = Vec::new();
        match ev.kind {
            UpdateKind::Insert => {
                inner_changes.extend(self.inner.insert(u, v + n)?);
                inner_changes.extend(self.inner.insert(v, u + n)?);
            }
            UpdateKind::Delete => {
                inner_changes.extend(self.inner.delete(u, v + n)?);
                inner_changes.extend(self.inner.delete(v, u + n)?);
            }
        }
        let mut out = Vec::new();
        for ch in inner_changes {
            let (a, b) = (ch.u.min(ch.v), ch.u.max(ch.v) - n);
            let k = key(a, b);
            self.ops += 1;
            match ch.kind {
                UpdateKind::Insert => {
                    let c = self.copies.entry(k).or_insert(0);
                    *c += 1;
                    if *c == 1 {
                        self.support_insert(k.0, k.1, &mut out)?;
                    }
                }
                UpdateKind::Delete => {
                    let c = self.copies.get_mut(&k).expect("copy was counted");
                    *c -= 1;
                    if *c == 0 {
                        self.copies.remove(&k);
                        self.support_delete(k.0, k.1, &mut out);
                    }
                }
            }
        }
        Ok(out)
    }

    fn support_insert(&mut self, u: NodeId, v: NodeId, out: &mut Vec<UpdateEvent>) -> Result<()> {
        for (x, y) in [(u, v), (v, u)] {
            let slots = &mut self.support[x as usize];
            let free = slots
                .iter()
                .position(|&s| s == FREE)
                .ok_or(Error::DegreeBound { node: x, bound: 2 })?;
            slots[free] = y;
        }
        self.support_m += 1;
        self.rematch(u, out);
        Ok(())
    }

    fn support_delete(&mut self, u: NodeId, v: NodeId, out: &mut Vec<UpdateEvent>) {
        for (x, y) in [(u, v), (v, u)] {
            let slots = &mut self.support[x as usize];
            let i = slots.iter().position(|&s| s == y).expect("support edge");
            slots[i] = FREE;
        }
        self.support_m -= 1;
        if self.mate[u as usize] == v {
            self.mate[u as usize] = FREE;
            self.mate[v as usize] = FREE;
            self.size -= 1;
            out.push(UpdateEvent::delete(u, v));
        }
        self.rematch(u, out);
        self.rematch(v, out);
    }

    /// Vertices of the component of `x` in path order, and whether it is a
    /// cycle.
    fn component(&mut self, x: NodeId) -> (Vec<NodeId>, bool) {
        let next = |s: &[[NodeId; 2]], at: NodeId, from: NodeId| {
            s[at as usize]
                .iter()
                .copied()
                .find(|&y| y != FREE && y != from)
        };
        // walk to one end, or all the way around a cycle
        let (mut prev, mut at) = (FREE, x);
        loop {
            self.ops += 1;
            match next(&self.support, at, prev) {
                None => break,
                Some(y) if y == x => {
                    let mut cyc = vec![x];
                    let (mut p, mut a) = (x, self.support[x as usize].iter().copied().find(|&s| s != FREE).unwrap());
                    while a != x {
                        cyc.push(a);
                        let nx = next(&self.support, a, p).unwrap();
                        p = a;
                        a = nx;
                        self.ops += 1;
                    }
                    return (cyc, true);
                }
                Some(y) => {
                    prev = at;
                    at = y;
                }
            }
        }
        let mut path = vec![at];
        let mut p = FREE;
        let mut a = at;
        while let Some(y) = next(&self.support, a, p) {
            path.push(y);
            p = a;
            a = y;
            self.ops += 1;
        }
        (path, false)
    }

    /// Replace the matching on `x`'s component by a maximum one.
    fn rematch(&mut self, x: NodeId, out: &mut Vec<UpdateEvent>) {
        let (seq, _) = self.component(x);
        let mut want = vec![FREE; seq.len()];
        let mut i = 0;
        while i + 1 < seq.len() {
            want[i] = seq[i + 1];
            want[i + 1] = seq[i];
            i += 2;
        }
        for (j, &v) in seq.iter().enumerate() {
            let old = self.mate[v as usize];
            if old != FREE && old != want[j] {
                self.mate[v as usize] = FREE;
                self.mate[old as usize] = FREE;
                self.size -= 1;
                out.push(UpdateEvent::delete(v.min(old), v.max(old)));
            }
        }
        for (j, &v) in seq.iter().enumerate() {
            let w = want[j];
            if w != FREE && self.mate[v as usize] == FREE {
                self.mate[v as usize] = w;
                self.mate[w as usize] = v;
                self.size += 1;
                out.push(UpdateEvent::insert(v.min(w), v.max(w)));
            }
            self.ops += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::mu;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge() {
        let mut d = DoubledView::new(2, 0.1).unwrap();
        d.update(&UpdateEvent::insert(0, 1)).unwrap();
        assert_eq!(d.x2(0, 1), 2);
        assert_eq!(d.output().edges(), vec![(0, 1)]);
    }

    #[test]
    fn triangle_gives_half_everywhere() {
        let mut d = DoubledView::new(3, 0.1).unwrap();
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            d.update(&UpdateEvent::insert(u, v)).unwrap();
        }
        // the double of a triangle is a 6-cycle with a perfect matching
        assert_eq!(d.inner().len(), 3);
        assert_eq!(d.len(), 1);
        let total: u32 = d.support_edges().iter().map(|&(u, v)| d.x2(u, v) as u32).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn random_stream_against_support_and_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 60;
        let eps = 0.1;
        let alpha = (1.5 + eps) * (1.0 + 6.0 * eps);
        let mut d = DoubledView::new(n, eps).unwrap();
        let mut live: Vec<(NodeId, NodeId)> = Vec::new();
        for _ in 0..1500 {
            let ev = if !live.is_empty() && rng.gen_bool(0.4) {
                let (u, v) = live.swap_remove(rng.gen_range(0..live.len()));
                UpdateEvent::delete(u, v)
            } else {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                if u == v || d.graph().has_edge(u, v) {
                    continue;
                }
                live.push(key(u, v));
                UpdateEvent::insert(u, v)
            };
            d.update(&ev).unwrap();
            let out = d.output();
            assert!(out.is_valid_in(|a, b| d.graph().has_edge(a, b)));
            let sup = d.support_edges();
            assert_eq!(out.len(), mu(n, &sup));
            assert!(out.is_valid_in(|a, b| sup.contains(&key(a, b))));
            let opt = mu(n, &live);
            assert!(out.len() as f64 * 1.5 * alpha >= opt as f64);
        }
    }
}
