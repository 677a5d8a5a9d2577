//! Structural diagnostics of a kernel against maximum matchings of the
//! graph: the degree-based fractional matching, the extended kernel count,
//! node degree classes, the taxonomy of length-three augmenting paths, the
//! 3-augmentable edge count and a maximum kernel matching covering as many
//! high-degree nodes as possible.
//!
//! Everything here is a read-only analysis of a snapshot.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::blossom::Search;
use crate::blossom::Roots;
use crate::degrees::{ApproxDegreeTable, ThresholdParams};
use crate::error::{Error, Result};
use crate::graph::{key, DynamicGraph, NodeId};
use crate::kernel::Kernel;
use crate::matching::{AdjList, Matching, FREE};
use crate::oracle::{max_matching, mu};

/// A kernel snapshot: edge set, degrees and parameters.
#[derive(Debug, Clone)]
pub struct KernelView {
    pub eps: f64,
    pub d: usize,
    edges: BTreeSet<(NodeId, NodeId)>,
    deg: Vec<usize>,
}

impl KernelView {
    pub fn new(n: usize, eps: f64, d: usize, edges: &[(NodeId, NodeId)]) -> Self {
        let mut deg = vec![0; n];
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if set.insert(key(u, v)) {
                deg[u as usize] += 1;
                deg[v as usize] += 1;
            }
        }
        KernelView { eps, d, edges: set, deg }
    }

    pub fn from_kernel(k: &Kernel) -> Self {
        let p = k.params();
        KernelView::new(k.n(), p.eps, p.d, &k.edges())
    }

    pub fn n(&self) -> usize {
        self.deg.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.deg[v as usize]
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains(&key(u, v))
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.edges.iter().copied().collect()
    }

    pub fn mu(&self) -> usize {
        mu(self.n(), &self.edges())
    }

    fn adjacency(&self) -> AdjList {
        AdjList::from_edges(self.n(), &self.edges())
    }
}

fn require_in(m: &Matching, what: &str, has: impl Fn(NodeId, NodeId) -> bool) -> Result<()> {
    for (u, v) in m.edges() {
        if !has(u, v) {
            return Err(Error::NotAMatching(format!("{what} edge ({u}, {v}) is not present")));
        }
    }
    Ok(())
}

fn require_maximum(m: &Matching, what: &str, n: usize, edges: &[(NodeId, NodeId)]) -> Result<()> {
    let opt = mu(n, edges);
    if m.len() != opt {
        return Err(Error::NotMaximum(format!("{what} has {} edges, maximum is {opt}", m.len())));
    }
    Ok(())
}

/// The fractional matching in the kernel defined by the kernel degrees
/// and a maximum matching `M*` of the graph.
#[derive(Debug, Clone, Serialize)]
pub struct FractionalMatching {
    /// `x_e` for every kernel edge, ascending.
    pub x: Vec<((NodeId, NodeId), f64)>,
    /// `y_v = Σ_{e∋v} x_e`.
    pub y: Vec<f64>,
    pub total: f64,
    pub max_y: f64,
    /// `|M*| = μ(G)`.
    pub mu_g: usize,
    /// `(1−ε)/2 · μ(G)`.
    pub size_bound: f64,
    /// `min over M* edges e of Σ_{v∈e} y_v`.
    pub min_pair_sum: f64,
    /// `M*` edges outside the kernel with `Σ y < 1−ε`.
    pub outside_violations: usize,
    /// `M*` edges inside the kernel with `Σ y < 1`.
    pub inside_violations: usize,
}

impl FractionalMatching {
    /// `x ≥ 0`, `y ≤ 1`, the per-edge bounds and the size bound all hold.
    pub fn holds(&self) -> bool {
        const TOL: f64 = 1e-9;
        self.x.iter().all(|&(_, x)| x >= -TOL)
            && self.max_y <= 1.0 + TOL
            && self.outside_violations == 0
            && self.inside_violations == 0
            && self.total >= self.size_bound - TOL
    }

    fn pair(&self, u: NodeId, v: NodeId) -> f64 {
        self.y[u as usize] + self.y[v as usize]
    }
}

pub fn kernel_fractional_matching(g: &DynamicGraph, k: &KernelView, mstar: &Matching) -> Result<FractionalMatching> {
    require_in(mstar, "M*", |u, v| g.has_edge(u, v))?;
    let d = k.d as f64;
    let mut y = vec![0.0; k.n()];
    let mut x = Vec::with_capacity(k.edges.len());
    let mut total = 0.0;
    for &(u, v) in &k.edges {
        let xe = if mstar.contains(u, v) {
            let slack = (k.degree(u) as f64 - 1.0) / d + (k.degree(v) as f64 - 1.0) / d;
            (1.0 - slack).max(0.0)
        } else {
            1.0 / d
        };
        y[u as usize] += xe;
        y[v as usize] += xe;
        total += xe;
        x.push(((u, v), xe));
    }
    let mut fm = FractionalMatching {
        x,
        max_y: y.iter().copied().fold(0.0, f64::max),
        y,
        total,
        mu_g: mstar.len(),
        size_bound: (1.0 - k.eps) / 2.0 * mstar.len() as f64,
        min_pair_sum: f64::INFINITY,
        outside_violations: 0,
        inside_violations: 0,
    };
    for (u, v) in mstar.edges() {
        let p = fm.pair(u, v);
        fm.min_pair_sum = fm.min_pair_sum.min(p);
        if k.contains(u, v) {
            if p < 1.0 - 1e-9 {
                fm.inside_violations += 1;
            }
        } else if p < 1.0 - k.eps - 1e-9 {
            fm.outside_violations += 1;
        }
    }
    Ok(fm)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtendedKernelReport {
    /// `M*` edges meeting either condition.
    pub r: usize,
    /// Edges with `Σ d_K ≥ d(1+s−2ε)`.
    pub high_sum: usize,
    /// Kernel edges with `Σ d_K ≤ d(1−s+2ε)`.
    pub low_sum: usize,
    pub m_star: usize,
    pub mu_k: usize,
    /// Whether `μ(G) ≥ (2−δ)·μ(K)`.
    pub precondition: bool,
    /// `δ/s · |M*|`.
    pub bound: f64,
    /// High-sum edges whose `Σ y` falls below `1+s−4ε`.
    pub high_pair_violations: usize,
    /// Low-sum edges whose `Σ y` falls below `1+s−2ε`.
    pub low_pair_violations: usize,
}

impl ExtendedKernelReport {
    /// `Some(r ≤ bound)` when the precondition holds.
    pub fn verdict(&self) -> Option<bool> {
        self.precondition.then(|| self.r as f64 <= self.bound + 1e-9)
    }
}

pub fn extended_kernel_count(
    g: &DynamicGraph,
    k: &KernelView,
    mstar: &Matching,
    s: f64,
    delta: f64,
) -> Result<ExtendedKernelReport> {
    let fm = kernel_fractional_matching(g, k, mstar)?;
    let d = k.d as f64;
    let eps = k.eps;
    let mu_k = k.mu();
    let mut rep = ExtendedKernelReport {
        r: 0,
        high_sum: 0,
        low_sum: 0,
        m_star: mstar.len(),
        mu_k,
        precondition: mstar.len() as f64 >= (2.0 - delta) * mu_k as f64 - 1e-9,
        bound: delta / s * mstar.len() as f64,
        high_pair_violations: 0,
        low_pair_violations: 0,
    };
    for (u, v) in mstar.edges() {
        let sum = (k.degree(u) + k.degree(v)) as f64;
        let hi = sum >= d * (1.0 + s - 2.0 * eps) - 1e-9;
        let lo = k.contains(u, v) && sum <= d * (1.0 - s + 2.0 * eps) + 1e-9;
        if hi {
            rep.high_sum += 1;
            if fm.pair(u, v) < 1.0 + s - 4.0 * eps - 1e-9 {
                rep.high_pair_violations += 1;
            }
        }
        if lo {
            rep.low_sum += 1;
            if fm.pair(u, v) < 1.0 + s - 2.0 * eps - 1e-9 {
                rep.low_pair_violations += 1;
            }
        }
        if hi || lo {
            rep.r += 1;
        }
    }
    Ok(rep)
}

/// Degree class of a node for one index; `High` excludes super-high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeClass {
    SuperHigh,
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeClassification {
    pub i: usize,
    pub sh: Vec<bool>,
    pub h: Vec<bool>,
    pub m: Vec<bool>,
    pub l: Vec<bool>,
}

fn class_of(t: (i64, i64, i64), deg: usize) -> NodeClass {
    let (hi_h, hi_sh, lo) = t;
    let deg = deg as i64;
    if deg >= hi_sh {
        NodeClass::SuperHigh
    } else if deg >= hi_h {
        NodeClass::High
    } else if deg <= lo {
        NodeClass::Low
    } else {
        NodeClass::Medium
    }
}

impl NodeClassification {
    pub fn class(&self, v: NodeId) -> NodeClass {
        let v = v as usize;
        if self.sh[v] {
            NodeClass::SuperHigh
        } else if self.h[v] {
            NodeClass::High
        } else if self.l[v] {
            NodeClass::Low
        } else {
            NodeClass::Medium
        }
    }

    /// `V_SH ⊆ V_H`, and `V_H`, `V_M`, `V_L` partition the nodes.
    pub fn consistent(&self) -> bool {
        (0..self.sh.len()).all(|v| {
            let parts = [self.h[v], self.m[v], self.l[v]].iter().filter(|&&b| b).count();
            (!self.sh[v] || self.h[v]) && parts == 1
        })
    }

    pub fn high_nodes(&self) -> Vec<NodeId> {
        (0..self.h.len()).filter(|&v| self.h[v]).map(|v| v as NodeId).collect()
    }
}

pub fn classify_nodes(k: &KernelView, params: ThresholdParams, i: usize) -> Result<NodeClassification> {
    let max = params.count();
    if !(1..=max).contains(&i) {
        return Err(Error::IndexOutOfRange { index: i, max });
    }
    let (hi_h, hi_sh, lo) = params.thresholds(i);
    let n = k.n();
    let mut c = NodeClassification {
        i,
        sh: vec![false; n],
        h: vec![false; n],
        m: vec![false; n],
        l: vec![false; n],
    };
    for v in 0..n {
        let deg = k.deg[v] as i64;
        c.sh[v] = deg >= hi_sh;
        c.h[v] = deg >= hi_h;
        c.l[v] = deg <= lo;
        c.m[v] = deg > lo && deg < hi_h;
    }
    Ok(c)
}

/// Frequent path types, or `None` for an infrequent path. `e1_in_k` is
/// whether `(v1, v2)` is a kernel edge.
fn path_type(c: [NodeClass; 4], e1_in_k: bool) -> Option<usize> {
    use NodeClass::*;
    match c {
        [Low, SuperHigh, SuperHigh, Low] => Some(1),
        [Low, High, SuperHigh, Low] if e1_in_k => Some(2),
        [Medium, High, SuperHigh, Low] if e1_in_k => Some(3),
        [Medium, Medium, SuperHigh, Low] if e1_in_k => Some(4),
        _ => None,
    }
}

/// Counts for one index.
#[derive(Debug, Clone, Serialize)]
pub struct IndexTaxonomy {
    pub i: usize,
    /// Paths of types 1 through 4.
    pub n: [usize; 4],
    pub n_f: usize,
    pub n_if: usize,
    /// Matched nodes outside every frequent path.
    pub bad: usize,
    /// Path nodes misclassified by some neighbor's approximate degree.
    pub misclassified: Option<usize>,
    /// Frequent paths free of misclassified nodes, by type.
    pub n_prime: Option<[usize; 4]>,
    pub n_f_prime: Option<usize>,
    pub bad_prime: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathTaxonomy {
    /// Length-three augmenting paths `v1-v2-v3-v4` of `M ⊕ M*`, oriented so
    /// that `(v3, v4)` is not a kernel edge.
    pub paths: Vec<[NodeId; 4]>,
    pub mu_k: usize,
    pub per_index: Vec<IndexTaxonomy>,
    /// Index with the fewest misclassified path nodes.
    pub i_star: Option<usize>,
    /// `8ε·μ(K)`.
    pub misclassification_bound: f64,
}

impl PathTaxonomy {
    pub fn index(&self, i: usize) -> &IndexTaxonomy {
        &self.per_index[i - 1]
    }
}

/// Length-three augmenting paths of `m` in `m ⊕ mstar`, as
/// `[a, b, c, e]` with `(b, c) ∈ m`.
pub fn length_three_paths(m: &Matching, mstar: &Matching) -> Vec<[NodeId; 4]> {
    let mut out = Vec::new();
    for (b, c) in m.edges() {
        if mstar.contains(b, c) {
            continue;
        }
        if let (Some(a), Some(e)) = (mstar.mate(b), mstar.mate(c)) {
            if m.is_free(a) && m.is_free(e) {
                out.push([a, b, c, e]);
            }
        }
    }
    out
}

pub fn classify_paths(
    g: &DynamicGraph,
    k: &KernelView,
    m: &Matching,
    mstar: &Matching,
    params: ThresholdParams,
    approx: Option<&ApproxDegreeTable>,
) -> Result<PathTaxonomy> {
    let n = k.n();
    require_in(m, "M", |u, v| k.contains(u, v))?;
    require_in(mstar, "M*", |u, v| g.has_edge(u, v))?;
    let kedges = k.edges();
    require_maximum(m, "M", n, &kedges)?;
    require_maximum(mstar, "M*", n, &g.edges().collect::<Vec<_>>())?;

    let mut paths = Vec::new();
    let mut ambiguous = Vec::new();
    for [a, b, c, e] in length_three_paths(m, mstar) {
        let fwd = !k.contains(c, e);
        let rev = !k.contains(a, b);
        debug_assert!(fwd || rev, "M is maximum in K");
        paths.push(if fwd { [a, b, c, e] } else { [e, c, b, a] });
        ambiguous.push(fwd && rev);
    }

    let matched: Vec<NodeId> = (0..n as NodeId).filter(|&v| !m.is_free(v)).collect();
    let mut per_index = Vec::new();
    for i in 1..=params.count() {
        let cls = classify_nodes(k, params, i)?;
        let t = params.thresholds(i);
        let mis: Option<Vec<bool>> = approx.map(|tab| {
            (0..n as NodeId)
                .map(|v| {
                    let own = cls.class(v);
                    tab.graph()
                        .neighbors(v)
                        .any(|u| tab.estimate(u, v).is_some_and(|est| class_of(t, est) != own))
                })
                .collect()
        });
        let typed = |p: &[NodeId; 4]| {
            let c = p.map(|v| cls.class(v));
            path_type(c, k.contains(p[0], p[1]))
        };
        let mut it = IndexTaxonomy {
            i,
            n: [0; 4],
            n_f: 0,
            n_if: 0,
            bad: 0,
            misclassified: None,
            n_prime: None,
            n_f_prime: None,
            bad_prime: None,
        };
        let mut in_frequent = vec![false; n];
        let mut in_frequent_prime = vec![false; n];
        let mut n_prime = [0; 4];
        let mut mis_count = 0;
        let mut on_path = vec![false; n];
        for (p, &amb) in paths.iter().zip(&ambiguous) {
            let mut ty = typed(p);
            if ty.is_none() && amb {
                ty = typed(&[p[3], p[2], p[1], p[0]]);
            }
            for &v in p {
                on_path[v as usize] = true;
            }
            match ty {
                Some(t) => {
                    it.n[t - 1] += 1;
                    for &v in p {
                        in_frequent[v as usize] = true;
                    }
                    if mis.as_ref().is_some_and(|mis| p.iter().all(|&v| !mis[v as usize])) {
                        n_prime[t - 1] += 1;
                        for &v in p {
                            in_frequent_prime[v as usize] = true;
                        }
                    }
                }
                None => it.n_if += 1,
            }
        }
        it.n_f = it.n.iter().sum();
        it.bad = matched.iter().filter(|&&v| !in_frequent[v as usize]).count();
        if let Some(mis) = &mis {
            for v in 0..n {
                if on_path[v] && mis[v] {
                    mis_count += 1;
                }
            }
            it.misclassified = Some(mis_count);
            it.n_prime = Some(n_prime);
            it.n_f_prime = Some(n_prime.iter().sum());
            it.bad_prime = Some(matched.iter().filter(|&&v| !in_frequent_prime[v as usize]).count());
        }
        per_index.push(it);
    }
    let i_star = per_index
        .iter()
        .filter_map(|it| it.misclassified.map(|c| (c, it.i)))
        .min()
        .map(|(_, i)| i);
    let mu_k = m.len();
    Ok(PathTaxonomy {
        paths,
        mu_k,
        per_index,
        i_star,
        misclassification_bound: 8.0 * params.eps * mu_k as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThreeAugReport {
    pub count: usize,
    pub m_len: usize,
    pub mu: usize,
    /// Whether `|M| ≤ (1/2+ε)·μ`.
    pub precondition: bool,
    /// `(1/2−3ε)·μ`.
    pub bound: f64,
}

impl ThreeAugReport {
    pub fn verdict(&self) -> Option<bool> {
        self.precondition.then(|| self.count as f64 >= self.bound - 1e-9)
    }
}

/// Count the 3-augmentable edges of a maximal matching `m` against an
/// oracle maximum matching.
pub fn count_3_augmentable(g: &DynamicGraph, m: &Matching, eps: f64) -> Result<ThreeAugReport> {
    require_in(m, "M", |u, v| g.has_edge(u, v))?;
    if let Some((u, v)) = g.edges().find(|&(u, v)| m.is_free(u) && m.is_free(v)) {
        return Err(Error::NotMaximum(format!("M is not maximal: ({u}, {v}) is free")));
    }
    let mstar = max_matching(g);
    let count = length_three_paths(m, &mstar).len();
    let mu = mstar.len();
    Ok(ThreeAugReport {
        count,
        m_len: m.len(),
        mu,
        precondition: m.len() as f64 <= (0.5 + eps) * mu as f64 + 1e-9,
        bound: (0.5 - 3.0 * eps) * mu as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HighCoverReport {
    pub matching: Vec<(NodeId, NodeId)>,
    pub mu_k: usize,
    pub high: usize,
    pub unmatched_high: usize,
    /// `7s·μ(K)`; reported for comparison only.
    pub bound: f64,
}

/// A maximum matching of the kernel leaving as few nodes of `V_H^(i)`
/// unmatched as possible.
///
/// Node sets covered by maximum matchings are the bases of a matroid, so
/// starting from any maximum matching and exchanging an unmatched high node
/// for a reachable matched non-high node until no exchange exists reaches
/// the optimum.
pub fn max_high_cover(k: &KernelView, params: ThresholdParams, i: usize, s: f64) -> Result<HighCoverReport> {
    let cls = classify_nodes(k, params, i)?;
    let adj = k.adjacency();
    let mut mate = max_matching(&adj).mates().to_vec();
    let mut search = Search::new();
    let mut improved = true;
    while improved {
        improved = false;
        for r in cls.high_nodes() {
            if mate[r as usize] != FREE {
                continue;
            }
            let root = [r];
            let grew = search.augment(&adj, &mut mate, Roots::Only(&root));
            debug_assert!(!grew, "matching is maximum");
            if let Some(x) = search.even_non_roots().into_iter().find(|&x| !cls.h[x as usize]) {
                search.shift_to(&mut mate, x);
                improved = true;
            }
        }
    }
    let m = Matching::from_mates(mate);
    let high = cls.h.iter().filter(|&&b| b).count();
    let unmatched_high = cls.high_nodes().iter().filter(|&&v| m.is_free(v)).count();
    Ok(HighCoverReport {
        mu_k: m.len(),
        matching: m.edges(),
        high,
        unmatched_high,
        bound: 7.0 * s * m.len() as f64,
    })
}

/// Kernel snapshot summary across indices, for reports.
pub fn class_sizes(k: &KernelView, params: ThresholdParams) -> Result<BTreeMap<usize, [usize; 4]>> {
    let mut out = BTreeMap::new();
    for i in 1..=params.count() {
        let c = classify_nodes(k, params, i)?;
        let mut cnt = [0; 4];
        for v in 0..k.n() as NodeId {
            cnt[c.class(v) as usize] += 1;
        }
        out.insert(i, cnt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelParams, Variant};
    use crate::matching::greedy_maximal;
    use crate::oracle::mwm;
    use crate::UpdateEvent;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, edges: &[(NodeId, NodeId)]) -> DynamicGraph {
        let mut g = DynamicGraph::new(n);
        for &(u, v) in edges {
            g.insert_edge(u, v).unwrap();
        }
        g
    }

    fn desk() -> ThresholdParams {
        ThresholdParams { eps: 0.05, s: 0.2, d: 20 }
    }

    #[test]
    fn single_kernel_matching_edge() {
        let g = graph(2, &[(0, 1)]);
        let k = KernelView::new(2, 0.1, 10, &[(0, 1)]);
        let fm = kernel_fractional_matching(&g, &k, &Matching::from_edges(2, &[(0, 1)]).unwrap()).unwrap();
        assert_eq!(fm.x, vec![((0, 1), 1.0)]);
        assert!(fm.holds());
    }

    #[test]
    fn regular_kernel_off_matching_edges() {
        // K_{4,4} is 4-regular; M* is a perfect matching inside it
        let e: Vec<_> = (0..4).flat_map(|a| (4..8).map(move |b| (a, b))).collect();
        let g = graph(8, &e);
        let k = KernelView::new(8, 0.25, 4, &e);
        let ms = Matching::from_edges(8, &[(0, 4), (1, 5), (2, 6), (3, 7)]).unwrap();
        let fm = kernel_fractional_matching(&g, &k, &ms).unwrap();
        for &((u, v), x) in &fm.x {
            if ms.contains(u, v) {
                assert_eq!(x, 0.0);
            } else {
                assert_eq!(x, 0.25);
            }
        }
        assert!(fm.holds());
    }

    #[test]
    fn invalid_mstar_rejected() {
        let g = graph(3, &[(0, 1)]);
        let k = KernelView::new(3, 0.1, 10, &[(0, 1)]);
        let ms = Matching::from_edges(3, &[(1, 2)]).unwrap();
        assert!(matches!(kernel_fractional_matching(&g, &k, &ms), Err(Error::NotAMatching(_))));
    }

    #[test]
    fn extended_count_perfect_matching() {
        let e = [(0, 1), (2, 3), (4, 5)];
        let g = graph(6, &e);
        let k = KernelView::new(6, 0.1, 10, &e);
        let ms = Matching::from_edges(6, &e).unwrap();
        let rep = extended_kernel_count(&g, &k, &ms, 0.2, 0.02).unwrap();
        assert_eq!(rep.r, 3);
        assert!(!rep.precondition);
        assert_eq!(rep.verdict(), None);
        assert_eq!(rep.low_pair_violations, 0);
        let empty = Matching::new(6);
        assert_eq!(extended_kernel_count(&g, &k, &empty, 0.2, 0.02).unwrap().r, 0);
    }

    #[test]
    fn node_classes_at_desk_thresholds() {
        let p = desk();
        // star degrees 4, 19, 10, 20 and 0
        let mut e = Vec::new();
        let mut next = 5;
        for (c, deg) in [(0u32, 4usize), (1, 19), (2, 10), (3, 20)] {
            for _ in 0..deg {
                e.push((c, next));
                next += 1;
            }
        }
        let k = KernelView::new(next as usize, p.eps, p.d, &e);
        let c = classify_nodes(&k, p, 1).unwrap();
        assert_eq!(c.class(0), NodeClass::Low);
        assert_eq!(c.class(1), NodeClass::SuperHigh);
        assert_eq!(c.class(2), NodeClass::Medium);
        assert!(c.consistent());
        for i in 1..=p.count() {
            let c = classify_nodes(&k, p, i).unwrap();
            assert_eq!(c.class(3), NodeClass::SuperHigh);
            assert_eq!(c.class(4), NodeClass::Low);
            // recompute from the real-valued thresholds
            let d = p.d as f64;
            let st = i as f64 * p.eps * p.eps;
            for v in 0..k.n() as NodeId {
                let x = k.degree(v) as f64;
                assert_eq!(c.sh[v as usize], x >= d * (1.0 - p.eps - st));
                assert_eq!(c.h[v as usize], x >= d * (1.0 - 2.0 * p.s - st));
                assert_eq!(c.l[v as usize], x <= d * (p.s + st));
            }
        }
        assert!(classify_nodes(&k, p, 0).is_err());
        assert!(classify_nodes(&k, p, 21).is_err());
    }

    /// Length-three path gadgets `v1-v2=v3-v4` with the requested types
    /// at desk thresholds. Hub degrees are padded with pairs `x=x'` that are
    /// matched in both matchings and adjacent to the hub through `x`, so the
    /// middle edges stay in a maximum kernel matching.
    fn gadgets(types: &[usize]) -> (DynamicGraph, KernelView, Matching, Matching) {
        let p = desk();
        let mut ke = Vec::new();
        let mut mid = Vec::new();
        let mut star = Vec::new();
        let mut pairs = Vec::new();
        let base = 4 * types.len() as NodeId;
        let mut next = base;
        let mut pad = |ke: &mut Vec<(NodeId, NodeId)>, h: NodeId, count: usize| {
            for _ in 0..count {
                ke.push((h, next));
                ke.push((next, next + 1));
                pairs.push((next, next + 1));
                next += 2;
            }
        };
        let mut outside = Vec::new();
        for (j, &t) in types.iter().enumerate() {
            let v = 4 * j as NodeId;
            let (a, b, c, e) = (v, v + 1, v + 2, v + 3);
            // kernel degrees of v1 and v2: SH 19, H 14, M 8, L 0 or 1
            let (deg_a, deg_b, e1_in_k) = match t {
                1 => (0, 19, false),
                2 => (1, 14, true),
                3 => (8, 14, true),
                4 => (8, 8, true),
                _ => unreachable!(),
            };
            ke.push((b, c));
            mid.push((b, c));
            star.extend([(a, b), (c, e)]);
            outside.push((c, e));
            if e1_in_k {
                ke.push((a, b));
            } else {
                outside.push((a, b));
            }
            let e1 = usize::from(e1_in_k);
            pad(&mut ke, a, deg_a - e1.min(deg_a));
            pad(&mut ke, b, deg_b - 1 - e1);
            pad(&mut ke, c, 18);
        }
        let n = next as usize;
        let mut ge = ke.clone();
        ge.extend(outside);
        mid.extend(pairs.iter().copied());
        star.extend(pairs.iter().copied());
        (
            graph(n, &ge),
            KernelView::new(n, p.eps, p.d, &ke),
            Matching::from_edges(n, &mid).unwrap(),
            Matching::from_edges(n, &star).unwrap(),
        )
    }

    #[test]
    fn type_one_gadget() {
        let (g, k, m, ms) = gadgets(&[1]);
        let tax = classify_paths(&g, &k, &m, &ms, desk(), None).unwrap();
        assert_eq!(tax.paths, vec![[0, 1, 2, 3]]);
        for it in &tax.per_index {
            assert_eq!(it.n, [1, 0, 0, 0]);
        }
        let none = classify_paths(&g, &k, &m, &m, desk(), None);
        assert!(matches!(none, Err(Error::NotAMatching(_)) | Err(Error::NotMaximum(_))));
    }

    #[test]
    fn exact_type_counts() {
        let p = desk();
        let (g, k, m, ms) = gadgets(&[1, 2, 3, 4, 2, 1]);
        assert_eq!(m.len(), k.mu());
        assert_eq!(ms.len(), mu(g.n(), &g.edges().collect::<Vec<_>>()));
        let tax = classify_paths(&g, &k, &m, &ms, p, None).unwrap();
        let it = tax.index(1);
        assert_eq!(it.n, [2, 2, 1, 1]);
        assert_eq!((it.n_f, it.n_if), (6, 0));
        // matched pad pairs lie on no path
        assert_eq!(it.bad, m.len() * 2 - 6 * 2);
        let again = classify_paths(&g, &k, &m, &ms, p, None).unwrap();
        assert_eq!(again.paths, tax.paths);
        assert_eq!(again.index(1).n, it.n);
    }

    #[test]
    fn equal_matchings_have_no_paths() {
        let e = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)];
        let g = graph(6, &e);
        let k = KernelView::new(6, 0.05, 20, &e);
        let mut table = ApproxDegreeTable::new(6, 1.0, 2).unwrap();
        for (u, v) in e {
            table.insert_edge(u, v).unwrap();
        }
        let m = max_matching(&g);
        let tax = classify_paths(&g, &k, &m, &m, desk(), Some(&table)).unwrap();
        assert!(tax.paths.is_empty());
        assert!(tax
            .per_index
            .iter()
            .all(|it| it.n_f == 0 && it.n_if == 0 && it.misclassified == Some(0)));
    }

    #[test]
    fn three_augmentable_small_cases() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let m = Matching::from_edges(4, &[(1, 2)]).unwrap();
        assert_eq!(count_3_augmentable(&g, &m, 0.0).unwrap().count, 1);
        let pm = Matching::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(count_3_augmentable(&g, &pm, 0.0).unwrap().count, 0);
        let not_maximal = Matching::new(4);
        assert!(matches!(count_3_augmentable(&g, &not_maximal, 0.0), Err(Error::NotMaximum(_))));
    }

    #[test]
    fn three_augmentable_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut fired = 0;
        for _ in 0..200 {
            let n = rng.gen_range(4..24);
            let mut e = BTreeSet::new();
            for _ in 0..rng.gen_range(1..3 * n) {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                if u != v {
                    e.insert(key(u, v));
                }
            }
            let mut e: Vec<_> = e.into_iter().collect();
            for i in (1..e.len()).rev() {
                e.swap(i, rng.gen_range(0..=i));
            }
            let g = graph(n, &e);
            let m = greedy_maximal(n, &e);
            let eps = 0.1;
            let rep = count_3_augmentable(&g, &m, eps).unwrap();
            if let Some(ok) = rep.verdict() {
                fired += 1;
                assert!(ok, "{rep:?}");
            }
        }
        assert!(fired > 0);
    }

    #[test]
    fn high_cover_matches_weighted_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = ThresholdParams { eps: 0.25, s: 0.2, d: 6 };
        for _ in 0..80 {
            let n = rng.gen_range(4..14);
            let mut e = BTreeSet::new();
            for _ in 0..rng.gen_range(1..3 * n) {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                if u != v {
                    e.insert(key(u, v));
                }
            }
            let e: Vec<_> = e.into_iter().collect();
            let k = KernelView::new(n, p.eps, p.d, &e);
            for i in 1..=p.count() {
                let rep = max_high_cover(&k, p, i, p.s).unwrap();
                let cls = classify_nodes(&k, p, i).unwrap();
                assert_eq!(rep.mu_k, k.mu());
                // cardinality first, then high nodes covered
                let big = 3 * (n as u64 + 1);
                let w: Vec<_> = e
                    .iter()
                    .map(|&(u, v)| (u, v, big + cls.h[u as usize] as u64 + cls.h[v as usize] as u64))
                    .collect();
                let best = mwm(n, &w).unwrap();
                let covered = best - big * rep.mu_k as u64;
                assert_eq!(rep.high - rep.unmatched_high, covered as usize);
            }
        }
    }

    #[test]
    fn snapshots_of_a_live_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 60;
        let params = KernelParams::new(0.2, 5).unwrap();
        let mut kern = Kernel::new(n, params, Variant::Pool);
        let mut g = DynamicGraph::new(n);
        let mut live: Vec<(NodeId, NodeId)> = Vec::new();
        for t in 0..1500 {
            let ev = if !live.is_empty() && rng.gen_bool(0.35) {
                let (u, v) = live.swap_remove(rng.gen_range(0..live.len()));
                UpdateEvent::delete(u, v)
            } else {
                let u = rng.gen_range(0..n as NodeId);
                let v = rng.gen_range(0..n as NodeId);
                if u == v || g.has_edge(u, v) {
                    continue;
                }
                live.push(key(u, v));
                UpdateEvent::insert(u, v)
            };
            g.apply(&ev).unwrap();
            kern.apply(&ev).unwrap();
            if t % 25 == 0 {
                let k = KernelView::from_kernel(&kern);
                let ms = max_matching(&g);
                let fm = kernel_fractional_matching(&g, &k, &ms).unwrap();
                assert!(fm.holds(), "step {t}: {fm:?}");
                assert!(k.mu() as f64 * (1.0 + 1.0 / k.d as f64) >= fm.total - 1e-9);
                let rep = extended_kernel_count(&g, &k, &ms, 0.3, 0.1).unwrap();
                assert_eq!(rep.high_pair_violations + rep.low_pair_violations, 0);
            }
        }
    }
}
