//! Edge orientation with out-degree O(√m).
//!
//! New edges point away from the endpoint with fewer out-edges. An endpoint
//! that climbs past `2⌈√(2m̂)⌉` hands one out-edge to a head below that
//! threshold. When `m` leaves `[m̂/2, 2m̂]` the scale is reset and a cursor
//! sweeps the nodes over subsequent updates, flipping excess edges.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{key, NodeId};

/// Edge `(from, to)` was oriented `from → to` and now points `to → from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flip {
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Debug, Clone)]
pub struct Orientation {
    out: Vec<Vec<NodeId>>,
    // key -> (tail, position of head in out[tail])
    rec: HashMap<(NodeId, NodeId), (NodeId, usize)>,
    m: usize,
    m_hat: usize,
    threshold: usize,
    carried_cap: usize,
    rebuild_at: Option<usize>,
    flips: u64,
    ops: u64,
}

pub fn threshold_for(m_hat: usize) -> usize {
    2 * ((2.0 * m_hat as f64).sqrt().ceil() as usize)
}

impl Orientation {
    pub fn new(n: usize) -> Self {
        Orientation {
            out: vec![Vec::new(); n],
            rec: HashMap::new(),
            m: 0,
            m_hat: 1,
            threshold: threshold_for(1),
            carried_cap: 0,
            rebuild_at: None,
            flips: 0,
            ops: 0,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn m_hat(&self) -> usize {
        self.m_hat
    }

    /// Out-degree threshold at the current scale.
    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Bound currently guaranteed on every out-degree. Exceeds `threshold`
    /// only while a downward rescale is still being swept.
    pub fn cap(&self) -> usize {
        self.threshold.max(self.carried_cap)
    }

    pub fn rebuilding(&self) -> bool {
        self.rebuild_at.is_some()
    }

    pub fn total_flips(&self) -> u64 {
        self.flips
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out[v as usize].len()
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn out_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.out[v as usize].iter().copied()
    }

    /// Tail of edge `(u, v)`.
    pub fn tail(&self, u: NodeId, v: NodeId) -> Option<NodeId> {
        self.rec.get(&key(u, v)).map(|r| r.0)
    }

    fn push_out(&mut self, tail: NodeId, head: NodeId) {
        let pos = self.out[tail as usize].len();
        self.out[tail as usize].push(head);
        self.rec.insert(key(tail, head), (tail, pos));
        self.ops += 1;
    }

    fn pop_out(&mut self, tail: NodeId, head: NodeId) {
        let (_, pos) = self.rec.remove(&key(tail, head)).expect("oriented edge");
        let list = &mut self.out[tail as usize];
        list.swap_remove(pos);
        if let Some(&moved) = list.get(pos) {
            self.rec.get_mut(&key(tail, moved)).expect("moved edge").1 = pos;
        }
        self.ops += 1;
    }

    /// Hand one out-edge of `x` to a head below the threshold.
    fn shed_one(
        &mut self,
        x: NodeId,
        allow: &mut dyn FnMut(NodeId, NodeId) -> bool,
    ) -> Option<Flip> {
        let t = self.threshold;
        let mut pick = None;
        for i in 0..self.out[x as usize].len() {
            self.ops += 1;
            let h = self.out[x as usize][i];
            if self.out[h as usize].len() < t && allow(x, h) {
                pick = Some(h);
                break;
            }
        }
        let h = pick?;
        self.pop_out(x, h);
        self.push_out(h, x);
        self.flips += 1;
        Some(Flip { from: x, to: h })
    }

    fn maybe_rescale(&mut self) {
        let shrink = self.m_hat > 1 && 2 * self.m < self.m_hat;
        let grow = self.m > 2 * self.m_hat;
        if shrink || grow {
            self.carried_cap = self.cap();
            self.m_hat = self.m.max(1);
            self.threshold = threshold_for(self.m_hat);
            self.rebuild_at = Some(0);
        }
    }

    fn rebuild_step(&mut self, allow: &mut dyn FnMut(NodeId, NodeId) -> bool) -> Vec<Flip> {
        let mut flips = Vec::new();
        let Some(mut at) = self.rebuild_at else {
            return flips;
        };
        let mut budget = (2.0 * self.m_hat as f64).sqrt().ceil() as usize;
        while budget > 0 && at < self.out.len() {
            budget -= 1;
            self.ops += 1;
            let v = at as NodeId;
            if self.out[at].len() > self.threshold {
                match self.shed_one(v, allow) {
                    Some(f) => flips.push(f),
                    None => break,
                }
            } else {
                at += 1;
            }
        }
        if at >= self.out.len() {
            self.rebuild_at = None;
            self.carried_cap = 0;
        } else {
            self.rebuild_at = Some(at);
        }
        flips
    }

    pub fn orient_insert(&mut self, u: NodeId, v: NodeId) -> Result<Vec<Flip>> {
        self.orient_insert_with(u, v, &mut |_, _| true)
    }

    /// As `orient_insert`, but a flip of `a → b` only happens if
    /// `allow(a, b)` returns true.
    pub fn orient_insert_with(
        &mut self,
        u: NodeId,
        v: NodeId,
        allow: &mut dyn FnMut(NodeId, NodeId) -> bool,
    ) -> Result<Vec<Flip>> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let k = key(u, v);
        if self.rec.contains_key(&k) {
            return Err(Error::DuplicateEdge(k.0, k.1));
        }
        let (du, dv) = (self.out_degree(u), self.out_degree(v));
        let tail = if du < dv || (du == dv && u < v) { u } else { v };
        let head = if tail == u { v } else { u };
        self.push_out(tail, head);
        self.m += 1;
        let mut flips = Vec::new();
        if self.out_degree(tail) > self.threshold {
            flips.extend(self.shed_one(tail, allow));
        }
        self.maybe_rescale();
        flips.extend(self.rebuild_step(allow));
        Ok(flips)
    }

    pub fn orient_delete(&mut self, u: NodeId, v: NodeId) -> Result<Vec<Flip>> {
        self.orient_delete_with(u, v, &mut |_, _| true)
    }

    pub fn orient_delete_with(
        &mut self,
        u: NodeId,
        v: NodeId,
        allow: &mut dyn FnMut(NodeId, NodeId) -> bool,
    ) -> Result<Vec<Flip>> {
        let k = key(u, v);
        let &(tail, _) = self.rec.get(&k).ok_or(Error::MissingEdge(k.0, k.1))?;
        let head = if tail == u { v } else { u };
        self.pop_out(tail, head);
        self.m -= 1;
        self.maybe_rescale();
        Ok(self.rebuild_step(allow))
    }

    /// Full consistency check: out-lists partition the edge set and every
    /// out-degree respects `cap()`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let mut count = 0;
        for (t, list) in self.out.iter().enumerate() {
            if list.len() > self.cap() {
                return Err(format!("node {t} out-degree {} > cap {}", list.len(), self.cap()));
            }
            for (pos, &h) in list.iter().enumerate() {
                match self.rec.get(&key(t as NodeId, h)) {
                    Some(&(tt, pp)) if tt == t as NodeId && pp == pos => count += 1,
                    _ => return Err(format!("edge {t}->{h} has a stale record")),
                }
            }
        }
        if count != self.rec.len() || count != self.m {
            return Err(format!("{count} listed edges, {} recorded", self.rec.len()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn bound(m: usize) -> f64 {
        3.0 * (2.0 * m as f64).sqrt() + 2.0
    }

    #[test]
    fn tie_broken_by_id() {
        let mut o = Orientation::new(2);
        assert!(o.orient_insert(0, 1).unwrap().is_empty());
        assert_eq!(o.tail(0, 1), Some(0));
        assert_eq!(o.out_neighbors(0).collect::<Vec<_>>(), vec![1]);
        assert_eq!(o.out_neighbors(1).count(), 0);
    }

    #[test]
    fn path_out_neighbors() {
        let mut o = Orientation::new(3);
        o.orient_insert(0, 1).unwrap();
        o.orient_insert(1, 2).unwrap();
        assert_eq!(o.out_neighbors(1).collect::<Vec<_>>(), vec![2]);
    }

    #[test]
    fn delete_and_reinsert() {
        let mut o = Orientation::new(2);
        o.orient_insert(0, 1).unwrap();
        o.orient_delete(1, 0).unwrap();
        assert_eq!(o.m(), 0);
        assert!(o.orient_delete(0, 1).is_err());
        o.orient_insert(1, 0).unwrap();
        o.check().unwrap();
    }

    #[test]
    fn star_center_last() {
        let mut o = Orientation::new(6);
        for leaf in 1..6 {
            o.orient_insert(leaf, 0).unwrap();
            assert!(o.max_out_degree() as f64 <= bound(o.m()));
        }
        o.check().unwrap();
    }

    #[test]
    fn random_insertions_respect_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200;
        let mut o = Orientation::new(n);
        let mut present = BTreeSet::new();
        while present.len() < 10_000 {
            let u = rng.gen_range(0..n as NodeId);
            let v = rng.gen_range(0..n as NodeId);
            if u == v || !present.insert(key(u, v)) {
                continue;
            }
            o.orient_insert(u, v).unwrap();
            assert!(o.max_out_degree() as f64 <= bound(o.m()));
        }
        o.check().unwrap();
        assert!(o.total_flips() <= 10_000);
    }

    #[test]
    fn sliding_window_respects_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200;
        let mut o = Orientation::new(n);
        let mut window = std::collections::VecDeque::new();
        let mut present = BTreeSet::new();
        let mut steps = 0usize;
        while steps < 15_000 {
            let u = rng.gen_range(0..n as NodeId);
            let v = rng.gen_range(0..n as NodeId);
            if u == v || present.contains(&key(u, v)) {
                continue;
            }
            o.orient_insert(u, v).unwrap();
            present.insert(key(u, v));
            window.push_back(key(u, v));
            steps += 1;
            if window.len() > 5000 {
                let (a, b) = window.pop_front().unwrap();
                present.remove(&(a, b));
                o.orient_delete(a, b).unwrap();
                steps += 1;
            }
            assert!(o.max_out_degree() as f64 <= bound(o.m()));
        }
        // drain to exercise downward rescaling
        while let Some((a, b)) = window.pop_front() {
            o.orient_delete(a, b).unwrap();
            assert!(o.max_out_degree() as f64 <= bound(o.m()));
        }
        o.check().unwrap();
    }

    #[test]
    fn out_lists_partition_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut o = Orientation::new(50);
        let mut present = BTreeSet::new();
        for _ in 0..2000 {
            let u = rng.gen_range(0..50);
            let v = rng.gen_range(0..50);
            if u == v {
                continue;
            }
            if present.remove(&key(u, v)) {
                o.orient_delete(u, v).unwrap();
            } else {
                present.insert(key(u, v));
                o.orient_insert(u, v).unwrap();
            }
        }
        let mut union = BTreeSet::new();
        for v in 0..50 {
            for h in o.out_neighbors(v) {
                assert!(union.insert(key(v, h)));
            }
        }
        assert_eq!(union, present);
    }
}
