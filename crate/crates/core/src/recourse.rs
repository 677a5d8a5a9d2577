//! Bounded-recourse wrapper around a dynamic matching algorithm.
//!
//! The output matching is moved toward the inner algorithm's matching in
//! phases. At each phase boundary a transformation plan from the current
//! output to the inner matching is built and then executed a fixed number of
//! steps per update, so the plan finishes exactly when the phase does.

use std::collections::{HashMap, HashSet};

use crate::error::{invalid, Result};
use crate::graph::{key, NodeId, UpdateEvent};
use crate::matching::{check_is_matching, Matching};

/// Recourse per update is at most `ceil(RECOURSE_CONSTANT / eps)`.
pub const RECOURSE_CONSTANT: f64 = 16.0;

/// One plan step. The removal is applied before the addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub remove: Option<(NodeId, NodeId)>,
    pub add: Option<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransformPlan {
    source: Vec<(NodeId, NodeId)>,
    target: Vec<(NodeId, NodeId)>,
    steps: Vec<Step>,
    cursor: usize,
}

impl TransformPlan {
    pub fn source(&self) -> &[(NodeId, NodeId)] {
        &self.source
    }

    pub fn target(&self) -> &[(NodeId, NodeId)] {
        &self.target
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn remaining(&self) -> usize {
        self.steps.len() - self.cursor
    }

    pub fn is_done(&self) -> bool {
        self.cursor == self.steps.len()
    }

    fn next_step(&mut self) -> Option<Step> {
        let s = self.steps.get(self.cursor).copied();
        if s.is_some() {
            self.cursor += 1;
        }
        s
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Source,
    Target,
}

/// Plan turning `m` into a superset of `m2`.
///
/// The symmetric difference splits into alternating paths and cycles. Each
/// component is walked from one end, pairing every target edge with the
/// source edge that blocks it. Components are ordered: size-increasing
/// paths, even paths, cycles, then size-decreasing paths. Source edges that
/// touch no target edge are left in place.
pub fn plan_transform(m: &[(NodeId, NodeId)], m2: &[(NodeId, NodeId)]) -> Result<TransformPlan> {
    check_is_matching(m)?;
    check_is_matching(m2)?;
    let mut ma: HashMap<NodeId, NodeId> = HashMap::new();
    let mut mb: HashMap<NodeId, NodeId> = HashMap::new();
    for &(u, v) in m {
        ma.insert(u, v);
        ma.insert(v, u);
    }
    for &(u, v) in m2 {
        mb.insert(u, v);
        mb.insert(v, u);
    }
    let diff = |map: &HashMap<NodeId, NodeId>, other: &HashMap<NodeId, NodeId>, x: NodeId| {
        map.get(&x).copied().filter(|&y| other.get(&x) != Some(&y))
    };
    let a = |x| diff(&ma, &mb, x);
    let b = |x| diff(&mb, &ma, x);

    // vertices in deterministic order: source endpoints, then target endpoints
    let mut order: Vec<NodeId> = Vec::with_capacity(2 * (m.len() + m2.len()));
    for &(u, v) in m.iter().chain(m2) {
        order.push(u);
        order.push(v);
    }

    let mut visited: HashSet<NodeId> = HashSet::new();
    let mut augmenting = Vec::new();
    let mut even = Vec::new();
    let mut cycles = Vec::new();
    let mut shrinking = Vec::new();

    let walk = |start: NodeId, first: Side, visited: &mut HashSet<NodeId>| {
        let mut comp: Vec<(Side, (NodeId, NodeId))> = Vec::new();
        let mut x = start;
        let mut side = first;
        visited.insert(x);
        loop {
            let next = match side {
                Side::Source => a(x),
                Side::Target => b(x),
            };
            let Some(y) = next else { break };
            if visited.contains(&y) && y == start {
                comp.push((side, (x, y)));
                break;
            }
            if visited.contains(&y) {
                break;
            }
            comp.push((side, (x, y)));
            visited.insert(y);
            x = y;
            side = match side {
                Side::Source => Side::Target,
                Side::Target => Side::Source,
            };
        }
        comp
    };

    for &x in &order {
        if visited.contains(&x) {
            continue;
        }
        let (ea, eb) = (a(x), b(x));
        let first = match (ea, eb) {
            (None, None) => continue,
            (Some(_), Some(_)) => continue,
            (Some(_), None) => Side::Source,
            (None, Some(_)) => Side::Target,
        };
        let comp = walk(x, first, &mut visited);
        let nb = comp.iter().filter(|c| c.0 == Side::Target).count();
        let na = comp.len() - nb;
        if nb == 0 {
            continue;
        }
        let mut comp = comp;
        if comp[0].0 == Side::Source && comp.last().unwrap().0 == Side::Target {
            comp.reverse();
        }
        match nb.cmp(&na) {
            std::cmp::Ordering::Greater => augmenting.push(comp),
            std::cmp::Ordering::Equal => even.push(comp),
            std::cmp::Ordering::Less => shrinking.push(comp),
        }
    }
    for &x in &order {
        if visited.contains(&x) || a(x).is_none() {
            continue;
        }
        cycles.push(walk(x, Side::Source, &mut visited));
    }

    let mut steps = Vec::new();
    for comp in augmenting
        .iter()
        .chain(&even)
        .chain(&cycles)
        .chain(&shrinking)
    {
        let mut i = 0;
        if comp[0].0 == Side::Source {
            steps.push(Step {
                remove: Some(key(comp[0].1 .0, comp[0].1 .1)),
                add: None,
            });
            i = 1;
        }
        while i < comp.len() {
            let (_, (u, v)) = comp[i];
            let remove = comp.get(i + 1).map(|&(_, (p, q))| key(p, q));
            steps.push(Step {
                remove,
                add: Some(key(u, v)),
            });
            i += 2;
        }
    }
    Ok(TransformPlan {
        source: m.iter().map(|&(u, v)| key(u, v)).collect(),
        target: m2.iter().map(|&(u, v)| key(u, v)).collect(),
        steps,
        cursor: 0,
    })
}

/// Output side of the wrapper: a matching that follows the inner
/// algorithm's matching with bounded changes per update.
#[derive(Debug, Clone)]
pub struct RecourseLimiter {
    eps: f64,
    out: Matching,
    plan: TransformPlan,
    phase_len: usize,
    elapsed: usize,
    per_update: usize,
    phases: u64,
    ops: u64,
}

impl RecourseLimiter {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0 / 6.0) {
            return Err(invalid("eps", format!("{eps} not in (0, 1/6)")));
        }
        Ok(RecourseLimiter {
            eps,
            out: Matching::new(n),
            plan: TransformPlan::default(),
            phase_len: 0,
            elapsed: 0,
            per_update: 0,
            phases: 0,
            ops: 0,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn output(&self) -> &Matching {
        &self.out
    }

    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn phase_len(&self) -> usize {
        self.phase_len
    }

    pub fn phases(&self) -> u64 {
        self.phases
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// The per-update recourse bound `ceil(c / eps)`.
    pub fn recourse_bound(&self) -> usize {
        (RECOURSE_CONSTANT / self.eps).ceil() as usize
    }

    /// Advance after the inner algorithm has processed one update (a single
    /// edge or a whole star). `deleted` lists the graph edges the update
    /// removed, `target` yields the inner algorithm's matching after the
    /// update (called only at phase boundaries) and `has_edge` answers
    /// membership in the current graph.
    ///
    /// Returns the output changes: `Insert` for added edges, `Delete` for
    /// removed ones.
    pub fn update(
        &mut self,
        target: impl FnOnce() -> Vec<(NodeId, NodeId)>,
        deleted: &[(NodeId, NodeId)],
        has_edge: impl Fn(NodeId, NodeId) -> bool,
    ) -> Result<Vec<UpdateEvent>> {
        let mut changes = Vec::new();
        for &(u, v) in deleted {
            self.ops += 1;
            if self.out.remove(u, v) {
                changes.push(UpdateEvent::delete(u.min(v), u.max(v)));
            }
        }
        if self.elapsed >= self.phase_len {
            let target = target();
            self.ops += (self.out.n() + target.len()) as u64;
            self.plan = plan_transform(&self.out.edges(), &target)?;
            self.phase_len = ((self.eps * target.len() as f64).floor() as usize).max(1);
            self.per_update = self.plan.len().div_ceil(self.phase_len);
            self.elapsed = 0;
            self.phases += 1;
        }
        self.elapsed += 1;
        for _ in 0..self.per_update {
            let Some(step) = self.plan.next_step() else { break };
            self.ops += 1;
            if let Some((u, v)) = step.remove {
                if self.out.remove(u, v) {
                    changes.push(UpdateEvent::delete(u, v));
                }
            }
            if let Some((u, v)) = step.add {
                if has_edge(u, v) && self.out.is_free(u) && self.out.is_free(v) {
                    self.out.add(u, v);
                    changes.push(UpdateEvent::insert(u, v));
                }
            }
        }
        Ok(changes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DynamicGraph, UpdateKind};
    use crate::oracle::mu;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Executes a plan, checking validity and the size floor after each step.
    fn run_plan(n: usize, m: &[(NodeId, NodeId)], m2: &[(NodeId, NodeId)]) -> Vec<usize> {
        let plan = plan_transform(m, m2).unwrap();
        assert!(plan.len() <= m.len() + m2.len());
        let mut cur = Matching::from_edges(n, m).unwrap();
        let floor = m.len().min(m2.len()).saturating_sub(1);
        let mut sizes = vec![cur.len()];
        for s in plan.steps() {
            if let Some((u, v)) = s.remove {
                assert!(cur.remove(u, v), "removing absent edge ({u}, {v})");
            }
            if let Some((u, v)) = s.add {
                assert!(m2.contains(&(u, v)) || m2.contains(&(v, u)));
                cur.add(u, v);
            }
            assert!(cur.len() >= floor);
            sizes.push(cur.len());
        }
        for &(u, v) in m2 {
            assert!(cur.contains(u, v));
        }
        for (u, v) in cur.edges() {
            assert!(m.contains(&(u, v)) || m.contains(&(v, u)) || m2.contains(&(u, v)) || m2.contains(&(v, u)));
        }
        sizes
    }

    #[test]
    fn identical_matchings_need_no_steps() {
        let m = [(0, 1), (2, 3)];
        assert!(plan_transform(&m, &m).unwrap().is_empty());
    }

    #[test]
    fn swap_then_add() {
        let (a, b, c, d) = (0, 1, 2, 3);
        let plan = plan_transform(&[(a, b)], &[(a, c), (b, d)]).unwrap();
        assert_eq!(plan.len(), 2);
        assert_eq!(plan.steps()[0].remove, Some((a, b)));
        assert_eq!(run_plan(4, &[(a, b)], &[(a, c), (b, d)]), vec![1, 1, 2]);
    }

    #[test]
    fn rejects_non_matchings() {
        assert!(plan_transform(&[(0, 1), (1, 2)], &[]).is_err());
        assert!(plan_transform(&[], &[(3, 3)]).is_err());
    }

    #[test]
    fn random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let n = rng.gen_range(2..=30usize);
            let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    if rng.gen_bool(0.2) {
                        pairs.push((u, v));
                    }
                }
            }
            let mut pick = |rng: &mut ChaCha8Rng| {
                pairs.shuffle(rng);
                let mut m = Matching::new(n);
                for &(u, v) in &pairs {
                    if m.is_free(u) && m.is_free(v) && rng.gen_bool(0.8) {
                        m.add(u, v);
                    }
                }
                m.edges()
            };
            let m = pick(&mut rng);
            let m2 = pick(&mut rng);
            run_plan(n, &m, &m2);
        }
    }

    #[test]
    fn cycle_dips_by_one() {
        let m = [(0, 1), (2, 3)];
        let m2 = [(1, 2), (0, 3)];
        assert_eq!(run_plan(4, &m, &m2), vec![2, 1, 1, 2]);
    }

    #[test]
    fn oscillating_inner_on_c4() {
        let eps = 0.1;
        let mut g = DynamicGraph::new(6);
        for i in 0..4 {
            g.insert_edge(i, (i + 1) % 4).unwrap();
        }
        let a = Matching::from_edges(6, &[(0, 1), (2, 3)]).unwrap();
        let b = Matching::from_edges(6, &[(1, 2), (0, 3)]).unwrap();
        let mut lim = RecourseLimiter::new(6, eps).unwrap();
        let bound = lim.recourse_bound();
        for t in 0..200 {
            // a spare edge toggles so that every step is a real update
            let ev = if g.has_edge(4, 5) {
                UpdateEvent::delete(4, 5)
            } else {
                UpdateEvent::insert(4, 5)
            };
            g.apply(&ev).unwrap();
            let mut inner = if t % 2 == 0 { a.clone() } else { b.clone() };
            if g.has_edge(4, 5) {
                inner.add(4, 5);
            }
            let deleted: Vec<_> = (ev.kind == UpdateKind::Delete).then_some((4, 5)).into_iter().collect();
            let ch = lim.update(|| inner.edges(), &deleted, |u, v| g.has_edge(u, v)).unwrap();
            assert!(ch.len() <= bound);
            assert!(lim.output().is_valid_in(|u, v| g.has_edge(u, v)));
            let opt = mu(6, &g.edges().collect::<Vec<_>>());
            assert!(lim.len() as f64 >= opt as f64 / (1.0 + 6.0 * eps));
        }
    }

    #[test]
    fn static_inner_is_reached_and_recourse_stops() {
        let n = 200;
        let edges: Vec<_> = (0..n as NodeId / 2).map(|i| (2 * i, 2 * i + 1)).collect();
        let inner = Matching::from_edges(n, &edges).unwrap();
        let mut lim = RecourseLimiter::new(n, 0.1).unwrap();
        let mut last = usize::MAX;
        for _ in 0..30 {
            last = lim.update(|| inner.edges(), &[], |_, _| true).unwrap().len();
        }
        assert_eq!(last, 0);
        assert_eq!(lim.output(), &inner);
    }

    #[test]
    fn star_deletion_changes_size_by_at_most_one() {
        // center 0 with leaves 1..=3; the other leaves are matched elsewhere
        let n = 8;
        let mut g = DynamicGraph::new(n);
        for (u, v) in [(0, 1), (0, 2), (0, 3), (2, 4), (3, 5), (6, 7)] {
            g.insert_edge(u, v).unwrap();
        }
        let inner = Matching::from_edges(n, &[(0, 1), (2, 4), (3, 5), (6, 7)]).unwrap();
        let mut lim = RecourseLimiter::new(n, 0.1).unwrap();
        lim.update(|| inner.edges(), &[], |u, v| g.has_edge(u, v)).unwrap();
        assert_eq!(lim.len(), 4);
        let star = [(0, 1), (0, 2), (0, 3)];
        for &(u, v) in &star {
            g.delete_edge(u, v).unwrap();
        }
        let mut inner2 = inner.clone();
        inner2.remove(0, 1);
        let before = lim.len();
        let ch = lim.update(|| inner2.edges(), &star, |u, v| g.has_edge(u, v)).unwrap();
        assert!(before - lim.len() <= 1);
        assert!(ch.len() <= lim.recourse_bound());
        assert!(lim.output().is_valid_in(|u, v| g.has_edge(u, v)));
    }

    #[test]
    fn eps_range_checked() {
        assert!(RecourseLimiter::new(4, 0.0).is_err());
        assert!(RecourseLimiter::new(4, 0.2).is_err());
        assert!(RecourseLimiter::new(4, 0.16).is_ok());
    }
}
