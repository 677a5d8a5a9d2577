//! Dynamic matching in a bipartite threshold subgraph under edge and star
//! updates.
//!
//! The inner matching comes from a [`PhaseMatcher`] whose per-phase target
//! has no augmenting path of length one or three; the output is that
//! matching passed through a [`RecourseLimiter`].

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, StarUpdate, UpdateEvent, UpdateKind};
use crate::matching::Matching;
use crate::recourse::RecourseLimiter;
use crate::stability::{PhaseMatcher, Target};

#[derive(Debug, Clone)]
pub struct BipartiteMatcher {
    eps: f64,
    inner: PhaseMatcher,
    limiter: RecourseLimiter,
    // Some(true) for the high side, Some(false) for the low side
    side: Vec<Option<bool>>,
    ops: u64,
}

impl BipartiteMatcher {
    /// `eps` in `(0, 1/6)`.
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0 / 6.0) {
            return Err(invalid("eps", format!("{eps} not in (0, 1/6)")));
        }
        Ok(BipartiteMatcher {
            eps,
            inner: PhaseMatcher::new(n, eps / 4.0, None, Target::NoShortPaths),
            limiter: RecourseLimiter::new(n, eps)?,
            side: vec![None; n],
            ops: 0,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn graph(&self) -> &DynamicGraph {
        self.inner.graph()
    }

    pub fn output(&self) -> &Matching {
        self.limiter.output()
    }

    pub fn len(&self) -> usize {
        self.limiter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.limiter.is_empty()
    }

    /// Matching held by the phase machinery before recourse limiting.
    pub fn inner_matching(&self) -> Matching {
        self.inner.matching()
    }

    pub fn recourse_bound(&self) -> usize {
        self.limiter.recourse_bound()
    }

    pub fn ops(&self) -> u64 {
        self.ops + self.inner.ops() + self.inner.graph().ops() + self.limiter.ops()
    }

    /// Side of `v`, if it has any edge.
    pub fn side(&self, v: NodeId) -> Option<bool> {
        self.side.get(v as usize).copied().flatten()
    }

    fn check_side(&self, v: NodeId, high: bool) -> Result<()> {
        let n = self.side.len();
        if v as usize >= n {
            return Err(Error::NodeOutOfRange { node: v, n });
        }
        match self.side[v as usize] {
            Some(s) if s != high => Err(Error::Bipartition(v)),
            _ => Ok(()),
        }
    }

    fn settle_sides(&mut self, touched: &[NodeId], high: &[bool]) {
        for (&v, &h) in touched.iter().zip(high) {
            self.side[v as usize] = (self.inner.graph().degree(v) > 0).then_some(h);
        }
    }

    fn step(&mut self, evs: &[UpdateEvent]) -> Result<Vec<UpdateEvent>> {
        self.inner.update_batch(evs)?;
        let deleted: Vec<_> = evs
            .iter()
            .filter(|e| e.kind == UpdateKind::Delete)
            .map(|e| (e.u, e.v))
            .collect();
        let inner = &self.inner;
        self.limiter
            .update(|| inner.matching().edges(), &deleted, |u, v| inner.graph().has_edge(u, v))
    }

    /// Insert the edge between `high` and `low`.
    pub fn insert(&mut self, high: NodeId, low: NodeId) -> Result<Vec<UpdateEvent>> {
        self.check_side(high, true)?;
        self.check_side(low, false)?;
        let out = self.step(&[UpdateEvent::insert(high, low)])?;
        self.settle_sides(&[high, low], &[true, false]);
        Ok(out)
    }

    pub fn delete(&mut self, u: NodeId, v: NodeId) -> Result<Vec<UpdateEvent>> {
        let (su, sv) = (self.side(u), self.side(v));
        let out = self.step(&[UpdateEvent::delete(u, v)])?;
        self.settle_sides(&[u, v], &[su.unwrap_or(false), sv.unwrap_or(false)]);
        Ok(out)
    }

    /// Apply a whole star as one update. Every leaf must sit on the side
    /// opposite the center.
    pub fn apply_star(&mut self, star: &StarUpdate, center_high: bool) -> Result<Vec<UpdateEvent>> {
        star.validate()?;
        let c = star.center;
        match star.kind {
            UpdateKind::Insert => {
                let ins: Vec<_> = star
                    .leaves
                    .iter()
                    .map(|&w| if center_high { (c, w) } else { (w, c) })
                    .collect();
                self.apply_batch(&[], &ins)
            }
            UpdateKind::Delete => {
                let del: Vec<_> = star.leaves.iter().map(|&w| (c, w)).collect();
                self.apply_batch(&del, &[])
            }
        }
    }

    /// Apply deletions, then insertions given as `(high, low)`, as a single
    /// logical update. The batch is validated before anything changes.
    pub fn apply_batch(
        &mut self,
        deletes: &[(NodeId, NodeId)],
        inserts: &[(NodeId, NodeId)],
    ) -> Result<Vec<UpdateEvent>> {
        let n = self.side.len();
        let g = self.inner.graph();
        let mut deg: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut side: BTreeMap<NodeId, Option<bool>> = BTreeMap::new();
        let mut gone = BTreeSet::new();
        for &(u, v) in deletes {
            if !g.has_edge(u, v) || !gone.insert(key(u, v)) {
                return Err(Error::MissingEdge(u.min(v), u.max(v)));
            }
            for x in [u, v] {
                *deg.entry(x).or_insert_with(|| g.degree(x)) -= 1;
                side.entry(x).or_insert(self.side[x as usize]);
            }
        }
        for (x, &d) in &deg {
            if d == 0 {
                side.insert(*x, None);
            }
        }
        for &(h, l) in inserts {
            for x in [h, l] {
                if x as usize >= n {
                    return Err(Error::NodeOutOfRange { node: x, n });
                }
            }
            if h == l {
                return Err(Error::SelfLoop(h));
            }
            let k = key(h, l);
            if g.has_edge(h, l) && !gone.remove(&k) {
                return Err(Error::DuplicateEdge(k.0, k.1));
            }
            for (x, want) in [(h, true), (l, false)] {
                let cur = *side.entry(x).or_insert(self.side[x as usize]);
                if cur.is_some_and(|s| s != want) {
                    return Err(Error::Bipartition(x));
                }
                side.insert(x, Some(want));
            }
        }
        self.ops += (deletes.len() + inserts.len()) as u64;
        let evs: Vec<UpdateEvent> = deletes
            .iter()
            .map(|&(u, v)| UpdateEvent::delete(u, v))
            .chain(inserts.iter().map(|&(h, l)| UpdateEvent::insert(h, l)))
            .collect();
        let out = self.step(&evs)?;
        for (x, s) in side {
            self.side[x as usize] = if self.inner.graph().degree(x) > 0 { s } else { None };
        }
        Ok(out)
    }
}
