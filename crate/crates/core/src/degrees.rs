//! Approximate kernel degrees and the bipartite threshold subgraphs built
//! from them.
//!
//! Every graph edge `(u, v)` carries two counters: `d^u(v)`, the degree of
//! `v` as last seen by `u`, and `d^v(u)`. When a node's kernel degree
//! changes, its refresh pointer walks `q = ceil(Δ/α)` steps along its
//! adjacency ring and overwrites the counters it passes, so every counter
//! stays within `α` of the exact kernel degree.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, StarUpdate, UpdateEvent, UpdateKind};

#[derive(Debug, Clone)]
pub struct ApproxDegreeTable {
    alpha: f64,
    max_degree: usize,
    q: usize,
    g: DynamicGraph,
    dk: Vec<usize>,
    // cnt[e] = [d^a(b), d^b(a)] for the edge e = (a, b), a < b
    cnt: Vec<[usize; 2]>,
    ops: u64,
}

impl ApproxDegreeTable {
    pub fn new(n: usize, alpha: f64, max_degree: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("{alpha} must be positive")));
        }
        if max_degree == 0 {
            return Err(invalid("max_degree", "must be positive"));
        }
        let q = ((max_degree as f64 / alpha).ceil() as usize).max(1);
        Ok(ApproxDegreeTable {
            alpha,
            max_degree,
            q,
            g: DynamicGraph::new(n),
            dk: vec![0; n],
            cnt: Vec::new(),
            ops: 0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Refresh quota per kernel degree change.
    pub fn quota(&self) -> usize {
        self.q
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.g
    }

    pub fn kernel_degree(&self, v: NodeId) -> usize {
        self.dk[v as usize]
    }

    pub fn ops(&self) -> u64 {
        self.ops + self.g.ops()
    }

    /// `d^w(v)`: the degree of `v` as seen from its neighbor `w`.
    pub fn estimate(&self, w: NodeId, v: NodeId) -> Option<usize> {
        let e = self.g.edge_id(w, v)?;
        Some(self.cnt[e][usize::from(w > v)])
    }

    fn set(&mut self, w: NodeId, v: NodeId, val: usize) {
        let e = self.g.edge_id(w, v).expect("counter on a missing edge");
        self.cnt[e][usize::from(w > v)] = val;
        self.ops += 1;
    }

    /// Add a graph edge with both counters set to the exact kernel degrees.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        for x in [u, v] {
            if (x as usize) < self.g.n() && self.g.degree(x) >= self.max_degree {
                return Err(Error::DegreeBound {
                    node: x,
                    bound: self.max_degree,
                });
            }
        }
        let e = self.g.insert_edge(u, v)?;
        if self.cnt.len() <= e {
            self.cnt.resize(e + 1, [0, 0]);
        }
        let (a, b) = key(u, v);
        self.cnt[e] = [self.dk[b as usize], self.dk[a as usize]];
        self.ops += 1;
        Ok(())
    }

    pub fn delete_edge(&mut self, u: NodeId, v: NodeId) -> Result<()> {
        self.g.delete_edge(u, v)?;
        Ok(())
    }

    /// Record a kernel edge change and refresh both endpoints. Returns, per
    /// endpoint, the neighbors whose counter of that endpoint was rewritten.
    pub fn kernel_change(&mut self, ev: &UpdateEvent) -> Result<[(NodeId, Vec<NodeId>); 2]> {
        let n = self.g.n();
        for x in [ev.u, ev.v] {
            if x as usize >= n {
                return Err(Error::NodeOutOfRange { node: x, n });
            }
        }
        match ev.kind {
            UpdateKind::Insert => {
                self.dk[ev.u as usize] += 1;
                self.dk[ev.v as usize] += 1;
            }
            UpdateKind::Delete => {
                if self.dk[ev.u as usize] == 0 || self.dk[ev.v as usize] == 0 {
                    return Err(Error::MissingEdge(ev.u, ev.v));
                }
                self.dk[ev.u as usize] -= 1;
                self.dk[ev.v as usize] -= 1;
            }
        }
        Ok([(ev.u, self.refresh(ev.u)), (ev.v, self.refresh(ev.v))])
    }

    fn refresh(&mut self, c: NodeId) -> Vec<NodeId> {
        let steps = self.q.min(self.g.degree(c));
        let val = self.dk[c as usize];
        let mut seen = Vec::with_capacity(steps);
        for _ in 0..steps {
            let w = self.g.advance_cursor(c).expect("nonempty ring");
            self.set(w, c, val);
            seen.push(w);
        }
        seen
    }

    /// Largest `|d^u(v) - d_K(v)|` over all adjacent pairs.
    pub fn max_error(&self) -> usize {
        self.g
            .edges()
            .flat_map(|(a, b)| {
                let e = self.g.edge_id(a, b).unwrap();
                [
                    self.cnt[e][0].abs_diff(self.dk[b as usize]),
                    self.cnt[e][1].abs_diff(self.dk[a as usize]),
                ]
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    H,
    SH,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdParams {
    pub eps: f64,
    pub s: f64,
    pub d: usize,
}

impl ThresholdParams {
    /// Number of indices `ceil(1/eps)`.
    pub fn count(&self) -> usize {
        (1.0 / self.eps - 1e-9).ceil() as usize
    }

    /// Integer thresholds for index `i` as `(high_h, high_sh, low)`. Lower
    /// bounds round up, upper bounds round down.
    pub fn thresholds(&self, i: usize) -> (i64, i64, i64) {
        let d = self.d as f64;
        let step = i as f64 * self.eps * self.eps;
        let hi_h = (d * (1.0 - 2.0 * self.s - step) - 1e-9).ceil() as i64;
        let hi_sh = (d * (1.0 - self.eps - step) - 1e-9).ceil() as i64;
        let lo = (d * (self.s + step) + 1e-9).floor() as i64;
        (hi_h, hi_sh, lo)
    }
}

/// A membership change of one subgraph, as a star around `star.center`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphStar {
    pub family: Family,
    /// 1-based index.
    pub index: usize,
    /// Whether the center is on the high side of every edge in the star.
    pub center_high: bool,
    pub star: StarUpdate,
}

/// Read-only snapshot of one threshold subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteView {
    pub n: usize,
    /// Edges as `(high, low)`, ascending.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl BipartiteView {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn low_side(&self) -> Vec<NodeId> {
        let mut v: Vec<_> = self.edges.iter().map(|e| e.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// The subgraphs `B_H^(i)` and `B_SH^(i)` for `i = 1..=ceil(1/eps)`.
#[derive(Debug, Clone)]
pub struct ThresholdSubgraphs {
    params: ThresholdParams,
    k: usize,
    hi_h: Vec<i64>,
    hi_sh: Vec<i64>,
    lo: Vec<i64>,
    table: ApproxDegreeTable,
    // per edge id and slot (family-major, then index): 0 absent, 1 the
    // smaller endpoint is high, 2 the larger endpoint is high
    member: Vec<u8>,
}

impl ThresholdSubgraphs {
    pub fn new(n: usize, params: ThresholdParams, alpha: f64, max_degree: usize) -> Result<Self> {
        if !(params.eps > 0.0 && params.eps < 1.0) {
            return Err(invalid("eps", format!("{} not in (0, 1)", params.eps)));
        }
        if !(params.s > 0.0 && params.s < 0.5) {
            return Err(invalid("s", format!("{} not in (0, 1/2)", params.s)));
        }
        if params.d == 0 {
            return Err(invalid("d", "must be positive"));
        }
        if params.eps > 2.0 * params.s {
            return Err(invalid("eps", "super-high threshold must not undercut the high one (eps <= 2s)"));
        }
        let k = params.count();
        let (mut hi_h, mut hi_sh, mut lo) = (Vec::new(), Vec::new(), Vec::new());
        for i in 1..=k {
            let (h, sh, l) = params.thresholds(i);
            if l >= h {
                return Err(invalid(
                    "s",
                    format!("low threshold {l} reaches high threshold {h} at index {i}"),
                ));
            }
            hi_h.push(h);
            hi_sh.push(sh);
            lo.push(l);
        }
        Ok(ThresholdSubgraphs {
            params,
            k,
            hi_h,
            hi_sh,
            lo,
            table: ApproxDegreeTable::new(n, alpha, max_degree)?,
            member: Vec::new(),
        })
    }

    pub fn params(&self) -> ThresholdParams {
        self.params
    }

    /// Number of indices per family.
    pub fn count(&self) -> usize {
        self.k
    }

    pub fn table(&self) -> &ApproxDegreeTable {
        &self.table
    }

    pub fn ops(&self) -> u64 {
        self.table.ops()
    }

    fn slots(&self) -> usize {
        2 * self.k
    }

    fn slot(&self, family: Family, i: usize) -> usize {
        match family {
            Family::H => i - 1,
            Family::SH => self.k + i - 1,
        }
    }

    fn slot_id(&self, slot: usize) -> (Family, usize) {
        if slot < self.k {
            (Family::H, slot + 1)
        } else {
            (Family::SH, slot - self.k + 1)
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.k {
            Err(Error::IndexOutOfRange {
                index: i,
                max: self.k,
            })
        } else {
            Ok(())
        }
    }

    /// Membership code of the edge `(a, b)`, `a < b`, in a slot, from the
    /// current counters.
    fn predicate(&self, a: NodeId, b: NodeId, slot: usize) -> u8 {
        let (family, i) = self.slot_id(slot);
        let hi = match family {
            Family::H => self.hi_h[i - 1],
            Family::SH => self.hi_sh[i - 1],
        };
        let lo = self.lo[i - 1];
        let ab = self.table.estimate(a, b).unwrap() as i64;
        let ba = self.table.estimate(b, a).unwrap() as i64;
        if ba >= hi && ab <= lo {
            1
        } else if ab >= hi && ba <= lo {
            2
        } else {
            0
        }
    }

    /// The high endpoint if `(u, v)` belongs to the given subgraph.
    pub fn member(&self, family: Family, i: usize, u: NodeId, v: NodeId) -> Result<Option<NodeId>> {
        self.check_index(i)?;
        let Some(e) = self.table.graph().edge_id(u, v) else {
            return Ok(None);
        };
        let (a, b) = key(u, v);
        Ok(match self.member[e * self.slots() + self.slot(family, i)] {
            1 => Some(a),
            2 => Some(b),
            _ => None,
        })
    }

    /// Add a graph edge; returns single-leaf stars for the subgraphs it
    /// joins.
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId) -> Result<Vec<SubgraphStar>> {
        self.table.insert_edge(u, v)?;
        let e = self.table.graph().edge_id(u, v).unwrap();
        let w = self.slots();
        if self.member.len() < (e + 1) * w {
            self.member.resize((e + 1) * w, 0);
        }
        let mut out = Vec::new();
        let mut changes = Changes::default();
        self.reevaluate(u, v, &mut changes);
        changes.flush(self, &mut out);
        Ok(out)
    }

    /// Remove a graph edge; returns single-leaf deletions for the subgraphs
    /// that contained it.
    pub fn delete_edge(&mut self, u: NodeId, v: NodeId) -> Result<Vec<SubgraphStar>> {
        let e = self
            .table
            .graph()
            .edge_id(u, v)
            .ok_or(Error::MissingEdge(u.min(v), u.max(v)))?;
        let (a, b) = key(u, v);
        let mut changes = Changes::default();
        let w = self.slots();
        for slot in 0..w {
            let code = std::mem::take(&mut self.member[e * w + slot]);
            if code != 0 {
                let high = if code == 1 { a } else { b };
                changes.push(slot, UpdateKind::Delete, u, v, high);
            }
        }
        self.table.delete_edge(u, v)?;
        let mut out = Vec::new();
        changes.flush(self, &mut out);
        Ok(out)
    }

    /// Apply one kernel edge change (already reflected in the kernel) and
    /// return the resulting star updates, grouped per subgraph, center, kind
    /// and side.
    pub fn on_kernel_change(&mut self, ev: &UpdateEvent) -> Result<Vec<SubgraphStar>> {
        let touched = self.table.kernel_change(ev)?;
        let mut out = Vec::new();
        for (c, leaves) in touched {
            let mut changes = Changes::default();
            for w in leaves {
                self.reevaluate(c, w, &mut changes);
            }
            changes.flush(self, &mut out);
        }
        Ok(out)
    }

    fn reevaluate(&mut self, c: NodeId, w: NodeId, changes: &mut Changes) {
        let e = self.table.graph().edge_id(c, w).unwrap();
        let (a, b) = key(c, w);
        for slot in 0..self.slots() {
            let new = self.predicate(a, b, slot);
            let idx = e * self.slots() + slot;
            let old = self.member[idx];
            self.table.ops += 1;
            if new == old {
                continue;
            }
            self.member[idx] = new;
            if old != 0 {
                changes.push(slot, UpdateKind::Delete, c, w, if old == 1 { a } else { b });
            }
            if new != 0 {
                changes.push(slot, UpdateKind::Insert, c, w, if new == 1 { a } else { b });
            }
        }
    }

    pub fn snapshot_subgraph(&self, family: Family, i: usize) -> Result<BipartiteView> {
        self.check_index(i)?;
        let slot = self.slot(family, i);
        let g = self.table.graph();
        let mut edges = Vec::new();
        for (a, b) in g.edges() {
            let e = g.edge_id(a, b).unwrap();
            match self.member[e * self.slots() + slot] {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
        }
        edges.sort_unstable();
        let mut side: BTreeMap<NodeId, bool> = BTreeMap::new();
        for &(h, l) in &edges {
            for (x, high) in [(h, true), (l, false)] {
                if *side.entry(x).or_insert(high) != high {
                    return Err(Error::Bipartition(x));
                }
            }
        }
        Ok(BipartiteView { n: g.n(), edges })
    }

    /// Recompute every membership from the counters and compare. Also checks
    /// counter accuracy and `E_SH ⊆ E_H`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let g = self.table.graph();
        let err = self.table.max_error();
        if err as f64 > self.table.alpha() {
            return Err(format!("counter error {err} exceeds alpha {}", self.table.alpha()));
        }
        for (a, b) in g.edges() {
            let e = g.edge_id(a, b).unwrap();
            for slot in 0..self.slots() {
                let want = self.predicate(a, b, slot);
                let have = self.member[e * self.slots() + slot];
                if want != have {
                    let (f, i) = self.slot_id(slot);
                    return Err(format!("edge ({a}, {b}) in {f:?}[{i}]: stored {have}, predicate {want}"));
                }
            }
            for i in 1..=self.k {
                let sh = self.member[e * self.slots() + self.slot(Family::SH, i)];
                let h = self.member[e * self.slots() + self.slot(Family::H, i)];
                if sh != 0 && sh != h {
                    return Err(format!("edge ({a}, {b}) in SH[{i}] but not H[{i}]"));
                }
            }
        }
        Ok(())
    }
}

/// Membership changes collected for one center.
#[derive(Default)]
struct Changes {
    // (slot, kind is insert, center is high) -> (center, leaves)
    groups: BTreeMap<(usize, bool, bool), (NodeId, Vec<NodeId>)>,
}

impl Changes {
    fn push(&mut self, slot: usize, kind: UpdateKind, c: NodeId, w: NodeId, high: NodeId) {
        let g = self
            .groups
            .entry((slot, kind == UpdateKind::Insert, high == c))
            .or_insert((c, Vec::new()));
        debug_assert_eq!(g.0, c);
        g.1.push(w);
    }

    fn flush(self, ts: &ThresholdSubgraphs, out: &mut Vec<SubgraphStar>) {
        for ((slot, insert, center_high), (center, leaves)) in self.groups {
            let (family, index) = ts.slot_id(slot);
            out.push(SubgraphStar {
                family,
                index,
                center_high,
                star: StarUpdate {
                    kind: if insert {
                        UpdateKind::Insert
                    } else {
                        UpdateKind::Delete
                    },
                    center,
                    leaves,
                },
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Kernel, KernelParams, Variant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quota_floor() {
        let t = ApproxDegreeTable::new(4, 10.0, 3).unwrap();
        assert_eq!(t.quota(), 1);
        assert!(ApproxDegreeTable::new(4, 0.0, 3).is_err());
    }

    #[test]
    fn insert_sets_exact_counters() {
        let mut t = ApproxDegreeTable::new(4, 1.0, 3).unwrap();
        t.insert_edge(0, 1).unwrap();
        t.kernel_change(&UpdateEvent::insert(0, 1)).unwrap();
        t.insert_edge(1, 2).unwrap();
        assert_eq!(t.estimate(2, 1), Some(1));
        assert_eq!(t.estimate(1, 2), Some(0));
    }

    /// Drive a kernel with a random bounded-degree stream and mirror every
    /// graph edge and kernel change into the subgraphs.
    fn sweep(n: usize, delta: usize, steps: usize, params: ThresholdParams, alpha: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kp = KernelParams::new(params.eps, params.d).unwrap();
        let mut k = Kernel::new(n, kp, Variant::Pool);
        let mut ts = ThresholdSubgraphs::new(n, params, alpha, delta).unwrap();
        let q = ts.table().quota();
        let mut live: Vec<(NodeId, NodeId)> = Vec::new();
        let mut kernel_changes = 0;
        for _ in 0..steps {
            let ev = if !live.is_empty() && rng.gen_bool(0.45) {
                let (u, v) = live.swap_remove(rng.gen_range(0..live.len()));
                UpdateEvent::delete(u, v)
            } else {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                let g = k.graph();
                if u == v || g.has_edge(u, v) || g.degree(u) >= delta || g.degree(v) >= delta {
                    continue;
                }
                live.push((u, v));
                UpdateEvent::insert(u, v)
            };
            let stars = match ev.kind {
                UpdateKind::Insert => ts.insert_edge(ev.u, ev.v).unwrap(),
                UpdateKind::Delete => ts.delete_edge(ev.u, ev.v).unwrap(),
            };
            assert!(stars.iter().all(|s| s.star.leaves.len() == 1));
            for ch in k.apply(&ev).unwrap() {
                kernel_changes += 1;
                let stars = ts.on_kernel_change(&ch.event).unwrap();
                let centers: std::collections::BTreeSet<_> = stars.iter().map(|s| s.star.center).collect();
                assert!(centers.len() <= 2);
                for s in &stars {
                    assert!(s.star.leaves.len() <= q);
                    s.star.validate().unwrap();
                }
            }
            for v in 0..n as NodeId {
                assert_eq!(ts.table().kernel_degree(v), k.degree(v));
            }
            ts.check().unwrap();
        }
        assert!(kernel_changes > 0);
    }

    #[test]
    fn sweep_exact_refresh() {
        let p = ThresholdParams { eps: 0.05, s: 0.2, d: 40 };
        sweep(60, 50, 3000, p, p.eps * p.eps * p.d as f64, 1);
    }

    #[test]
    fn sweep_coarse_counters() {
        let p = ThresholdParams { eps: 0.1, s: 0.2, d: 10 };
        sweep(40, 20, 4000, p, 2.0, 2);
    }

    #[test]
    fn saturated_neighbor_enters_every_super_high_subgraph() {
        let d = 10;
        let p = ThresholdParams { eps: 0.1, s: 0.2, d };
        let mut ts = ThresholdSubgraphs::new(d + 2, p, 1.0, d + 1).unwrap();
        // node 0 gets kernel degree d through leaves 1..=d; node d+1 is a
        // non-kernel neighbor with kernel degree 0
        let y = (d + 1) as NodeId;
        ts.insert_edge(0, y).unwrap();
        for w in 1..=d as NodeId {
            ts.insert_edge(0, w).unwrap();
            ts.on_kernel_change(&UpdateEvent::insert(0, w)).unwrap();
        }
        ts.check().unwrap();
        for i in 1..=ts.count() {
            assert_eq!(ts.member(Family::SH, i, 0, y).unwrap(), Some(0));
            assert_eq!(ts.member(Family::H, i, 0, y).unwrap(), Some(0));
            let view = ts.snapshot_subgraph(Family::SH, i).unwrap();
            assert!(view.edges.contains(&(0, y)));
            assert!(view.low_side().contains(&y));
        }
        assert!(ts.snapshot_subgraph(Family::H, 0).is_err());
        assert!(ts.snapshot_subgraph(Family::H, ts.count() + 1).is_err());
    }

    #[test]
    fn empty_kernel_has_empty_subgraphs() {
        let p = ThresholdParams { eps: 0.1, s: 0.2, d: 10 };
        let ts = ThresholdSubgraphs::new(5, p, 1.0, 4).unwrap();
        for i in 1..=ts.count() {
            assert!(ts.snapshot_subgraph(Family::H, i).unwrap().is_empty());
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let bad = ThresholdParams { eps: 0.1, s: 0.4, d: 10 };
        assert!(ThresholdSubgraphs::new(5, bad, 1.0, 4).is_err());
        let bad = ThresholdParams { eps: 0.3, s: 0.1, d: 10 };
        assert!(ThresholdSubgraphs::new(5, bad, 1.0, 4).is_err());
    }
}
