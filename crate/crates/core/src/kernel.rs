//! Dynamic (ε,d)-kernels.
//!
//! A kernel is an edge subgraph `K` of `G` in which every node has degree at
//! most `d` (P1) and every edge of `G` left out of `K` has an endpoint of
//! kernel degree at least `d(1−ε)` (P2).
//!
//! Two maintenance strategies are provided. [`Variant::Scan`] advances a
//! cyclic cursor through the neighbors of a node that lost a kernel edge,
//! at most `⌈n/(εd)⌉` steps per endpoint. [`Variant::Pool`] orients the
//! graph with out-degree `O(√m)` and keeps, for every node, a pool of
//! low-degree in-neighbors ready to replace a lost kernel edge in O(1); a
//! node below `d(1−ε)` sits in the pool of every out-neighbor.
//!
//! Both emit at most three kernel changes per graph update, and edges leave
//! the kernel only when they leave the graph.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, UpdateEvent, UpdateKind};
use crate::lists::Lists;
use crate::orientation::Orientation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Scan,
    Pool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub eps: f64,
    pub d: usize,
}

impl KernelParams {
    pub fn new(eps: f64, d: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid("eps", format!("{eps} is outside (0, 1/2)")));
        }
        if d == 0 {
            return Err(invalid("d", "must be positive"));
        }
        Ok(KernelParams { eps, d })
    }

    /// Whether `d ≥ 1/ε`, the regime in which a kernel is guaranteed to
    /// hold a `(2+8ε)`-approximate matching.
    pub fn quality_regime(&self) -> bool {
        self.d as f64 * self.eps >= 1.0 - 1e-12
    }

    /// Smallest integer degree satisfying P2, i.e. `⌈d(1−ε)⌉`.
    pub fn satisfied_degree(&self) -> usize {
        (self.d as f64 * (1.0 - self.eps) - 1e-9).ceil() as usize
    }
}

/// One kernel-edge change, numbered in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelChange {
    pub seq: u64,
    pub event: UpdateEvent,
}

impl KernelChange {
    pub fn is_insert(&self) -> bool {
        self.event.kind == UpdateKind::Insert
    }
}

impl fmt::Display for KernelChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.is_insert() { '+' } else { '-' };
        write!(f, "({}, {}, {}, {})", self.seq, sign, self.event.u, self.event.v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// P1: kernel degree above `d`.
    Degree { node: NodeId, degree: usize },
    /// P2: omitted edge with both endpoints below `d(1−ε)`.
    Unsatisfied { u: NodeId, v: NodeId },
    /// Kernel edge missing from the graph.
    NotInGraph { u: NodeId, v: NodeId },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelReport {
    pub violations: Vec<Violation>,
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Full verification of P1, P2 and `E_K ⊆ E`.
pub fn check_kernel(
    g: &DynamicGraph,
    kernel: &BTreeSet<(NodeId, NodeId)>,
    params: KernelParams,
) -> KernelReport {
    let mut report = KernelReport::default();
    let mut deg = vec![0usize; g.n()];
    for &(u, v) in kernel {
        if !g.has_edge(u, v) {
            report.violations.push(Violation::NotInGraph { u, v });
        }
        deg[u as usize] += 1;
        deg[v as usize] += 1;
    }
    for (v, &dv) in deg.iter().enumerate() {
        if dv > params.d {
            report.violations.push(Violation::Degree {
                node: v as NodeId,
                degree: dv,
            });
        }
    }
    let sat = params.satisfied_degree();
    for (u, v) in g.edges() {
        if !kernel.contains(&key(u, v)) && deg[u as usize].max(deg[v as usize]) < sat {
            report.violations.push(Violation::Unsatisfied { u, v });
        }
    }
    report
}

#[derive(Debug, Clone)]
struct PoolState {
    orient: Orientation,
    // list id = pool host, item = edge id
    pools: Lists,
    // list 2w = L_in(w), 2w+1 = L_out(w); items are non-kernel out-edges of w
    tails: Lists,
    r_used: Vec<usize>,
    dirty: Vec<NodeId>,
    is_dirty: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    params: KernelParams,
    variant: Variant,
    graph: DynamicGraph,
    in_k: Vec<bool>,
    dk: Vec<usize>,
    size: usize,
    seq: u64,
    ops: u64,
    pool: Option<Box<PoolState>>,
}

impl Kernel {
    pub fn new(n: usize, params: KernelParams, variant: Variant) -> Self {
        let pool = (variant == Variant::Pool).then(|| {
            Box::new(PoolState {
                orient: Orientation::new(n),
                pools: Lists::new(n),
                tails: Lists::new(2 * n),
                r_used: vec![0; n],
                dirty: Vec::new(),
                is_dirty: vec![false; n],
            })
        });
        Kernel {
            params,
            variant,
            graph: DynamicGraph::new(n),
            in_k: Vec::new(),
            dk: vec![0; n],
            size: 0,
            seq: 0,
            ops: 0,
            pool,
        }
    }

    pub fn params(&self) -> KernelParams {
        self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Number of kernel edges.
    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Kernel degree `d_K(v)`.
    pub fn degree(&self, v: NodeId) -> usize {
        self.dk[v as usize]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.dk
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.graph.edge_id(u, v).is_some_and(|e| self.in_k[e])
    }

    /// Kernel edges in ascending order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.edge_set().into_iter().collect()
    }

    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.graph.edges().filter(|&(u, v)| self.contains(u, v)).collect()
    }

    /// Kernel neighbors of `v`.
    pub fn neighbors(&self, v: NodeId) -> Vec<NodeId> {
        self.graph.neighbors(v).filter(|&w| self.contains(v, w)).collect()
    }

    /// Per-endpoint scan length: `⌈n/(εd)⌉` for the scan variant and
    /// `⌈cap/(εd)⌉` for the pool variant, where `cap` bounds out-degrees.
    pub fn scan_budget(&self) -> usize {
        match &self.pool {
            None => ((self.n() as f64) / (self.params.eps * self.params.d as f64)).ceil() as usize,
            Some(p) => self.r_for(p.orient.cap()),
        }
    }

    fn r_for(&self, cap: usize) -> usize {
        ((cap as f64) / (self.params.eps * self.params.d as f64)).ceil().max(1.0) as usize
    }

    /// Elementary operations performed so far, including the graph and
    /// orientation substrates.
    pub fn ops(&self) -> u64 {
        self.ops + self.graph.ops() + self.pool.as_ref().map_or(0, |p| p.orient.ops())
    }

    pub fn orientation(&self) -> Option<&Orientation> {
        self.pool.as_ref().map(|p| &p.orient)
    }

    pub fn check(&self) -> KernelReport {
        check_kernel(&self.graph, &self.edge_set(), self.params)
    }

    pub fn apply(&mut self, ev: &UpdateEvent) -> Result<Vec<KernelChange>> {
        match ev.kind {
            UpdateKind::Insert => self.insert(ev.u, ev.v),
            UpdateKind::Delete => self.delete(ev.u, ev.v),
        }
    }

    fn log(&mut self, out: &mut Vec<KernelChange>, kind: UpdateKind, u: NodeId, v: NodeId) {
        let (a, b) = key(u, v);
        out.push(KernelChange {
            seq: self.seq,
            event: UpdateEvent { kind, u: a, v: b },
        });
        self.seq += 1;
    }

    fn admit(&mut self, e: usize, u: NodeId, v: NodeId, out: &mut Vec<KernelChange>) {
        debug_assert!(self.dk[u as usize] < self.params.d && self.dk[v as usize] < self.params.d);
        self.in_k[e] = true;
        self.dk[u as usize] += 1;
        self.dk[v as usize] += 1;
        self.size += 1;
        self.ops += 1;
        self.log(out, UpdateKind::Insert, u, v);
        if self.pool.is_some() {
            self.mark(u);
            self.mark(v);
        }
    }

    fn open_slot(&mut self, e: usize) {
        if e >= self.in_k.len() {
            self.in_k.resize(e + 1, false);
        }
        self.in_k[e] = false;
    }

    pub fn insert(&mut self, u: NodeId, v: NodeId) -> Result<Vec<KernelChange>> {
        let e = self.graph.insert_edge(u, v)?;
        self.open_slot(e);
        let mut out = Vec::new();
        let d = self.params.d;
        let admitted = self.dk[u as usize] < d && self.dk[v as usize] < d;
        if admitted {
            self.admit(e, u, v, &mut out);
        }
        if self.pool.is_some() {
            let flip_budget = (3 - out.len()) / 2;
            let flipped = self.orient(u, v, UpdateKind::Insert, flip_budget)?;
            if !admitted {
                let tail = self.pool_ref().orient.tail(u, v).expect("oriented");
                self.list_out_edge(e, tail);
            }
            self.relist(&flipped);
            self.run_fixes(&mut out);
        }
        Ok(out)
    }

    pub fn delete(&mut self, u: NodeId, v: NodeId) -> Result<Vec<KernelChange>> {
        let e = self.graph.edge_id(u, v).ok_or_else(|| {
            let (a, b) = key(u, v);
            Error::MissingEdge(a, b)
        })?;
        let was_k = self.in_k[e];
        let mut out = Vec::new();
        let mut flipped = Vec::new();
        if self.pool.is_some() {
            if !was_k {
                self.unlist(e);
            }
            let flip_budget = if was_k { 0 } else { 1 };
            flipped = self.orient(u, v, UpdateKind::Delete, flip_budget)?;
        }
        self.graph.delete_edge(u, v)?;
        self.in_k[e] = false;
        if was_k {
            self.dk[u as usize] -= 1;
            self.dk[v as usize] -= 1;
            self.size -= 1;
            self.log(&mut out, UpdateKind::Delete, u, v);
        }
        match self.variant {
            Variant::Scan => {
                if was_k {
                    self.scan_replace(u, &mut out);
                    self.scan_replace(v, &mut out);
                }
            }
            Variant::Pool => {
                if was_k {
                    self.mark(u);
                    self.mark(v);
                    self.pool_replace(u, &mut out);
                    self.run_fixes(&mut out);
                    self.pool_replace(v, &mut out);
                }
                self.relist(&flipped);
                self.run_fixes(&mut out);
            }
        }
        Ok(out)
    }

    fn scan_replace(&mut self, v: NodeId, out: &mut Vec<KernelChange>) {
        let d = self.params.d;
        if self.dk[v as usize] >= d {
            return;
        }
        let steps = self.scan_budget().min(self.graph.degree(v));
        for _ in 0..steps {
            self.ops += 1;
            let w = self.graph.advance_cursor(v).expect("non-empty ring");
            let e = self.graph.edge_id(v, w).expect("ring edge");
            if self.dk[w as usize] < d && !self.in_k[e] {
                self.admit(e, v, w, out);
                return;
            }
        }
    }

    fn pool_ref(&self) -> &PoolState {
        self.pool.as_ref().expect("pool variant")
    }

    fn pool_mut(&mut self) -> &mut PoolState {
        self.pool.as_mut().expect("pool variant")
    }

    /// Update the orientation. Flips of non-kernel edges may each cost two
    /// kernel changes during relisting, so at most `flip_budget` of them
    /// are permitted; kernel-edge flips are free.
    fn orient(
        &mut self,
        u: NodeId,
        v: NodeId,
        kind: UpdateKind,
        flip_budget: usize,
    ) -> Result<Vec<(NodeId, NodeId)>> {
        let Kernel {
            graph, in_k, pool, ..
        } = self;
        let p = pool.as_mut().expect("pool variant");
        let mut left = flip_budget;
        let mut allow = |a: NodeId, b: NodeId| {
            let kernel_edge = graph.edge_id(a, b).is_some_and(|e| in_k[e]);
            if kernel_edge {
                true
            } else if left > 0 {
                left -= 1;
                true
            } else {
                false
            }
        };
        let flips = match kind {
            UpdateKind::Insert => p.orient.orient_insert_with(u, v, &mut allow)?,
            UpdateKind::Delete => p.orient.orient_delete_with(u, v, &mut allow)?,
        };
        Ok(flips.into_iter().map(|f| (f.from, f.to)).collect())
    }

    fn mark(&mut self, w: NodeId) {
        let p = self.pool_mut();
        if !p.is_dirty[w as usize] {
            p.is_dirty[w as usize] = true;
            p.dirty.push(w);
        }
    }

    fn head_of(&self, e: usize, tail: NodeId) -> NodeId {
        let (a, b) = self.graph.endpoints(e).expect("live edge");
        if a == tail {
            b
        } else {
            a
        }
    }

    fn list_out_edge(&mut self, e: usize, tail: NodeId) {
        self.pool_mut().tails.push_front(2 * tail as usize + 1, e);
        self.ops += 1;
        self.mark(tail);
    }

    /// Drop a non-kernel edge from its tail's lists and its head's pool.
    fn unlist(&mut self, e: usize) {
        let p = self.pool_mut();
        let owner = p.tails.remove(e);
        p.pools.remove(e);
        self.ops += 1;
        if let Some(list) = owner {
            self.mark((list / 2) as NodeId);
        }
    }

    fn relist(&mut self, flipped: &[(NodeId, NodeId)]) {
        for &(a, b) in flipped {
            let Some(e) = self.graph.edge_id(a, b) else {
                continue;
            };
            if self.in_k[e] {
                continue;
            }
            if self.pool_ref().tails.owner(e).is_none() {
                continue;
            }
            self.unlist(e);
            let tail = self.pool_ref().orient.tail(a, b).expect("oriented");
            self.list_out_edge(e, tail);
        }
    }

    /// Kernel edge at `x` was lost: take the first pool member if any,
    /// otherwise let the fix of `x` scan its out-neighbors.
    fn pool_replace(&mut self, x: NodeId, out: &mut Vec<KernelChange>) {
        self.ops += 1;
        if self.dk[x as usize] >= self.params.d {
            return;
        }
        match self.pool_ref().pools.front(x as usize) {
            Some(e) => {
                let w = self.head_of(e, x);
                self.unlist(e);
                self.admit(e, x, w, out);
            }
            None => self.mark(x),
        }
    }

    fn run_fixes(&mut self, out: &mut Vec<KernelChange>) {
        let mut i = 0;
        while i < self.pool_ref().dirty.len() {
            let w = self.pool_ref().dirty[i];
            self.pool_mut().is_dirty[w as usize] = false;
            self.fix(w, out);
            i += 1;
        }
        self.pool_mut().dirty.clear();
    }

    fn quota(&self, w: NodeId, r: usize) -> usize {
        let p = self.pool_ref();
        let wi = w as usize;
        let out_deg = p.tails.len(2 * wi) + p.tails.len(2 * wi + 1);
        out_deg.min((self.params.d - self.dk[wi]) * r)
    }

    /// Restore the pool invariant for `w`: it belongs to exactly
    /// `min(d_out, (d − d_K(w))·R)` pools of its out-neighbors.
    fn fix(&mut self, w: NodeId, out: &mut Vec<KernelChange>) {
        let d = self.params.d;
        let r = self.r_for(self.pool_ref().orient.cap());
        self.pool_mut().r_used[w as usize] = r;
        let (lin, lout) = (2 * w as usize, 2 * w as usize + 1);
        loop {
            let target = self.quota(w, r);
            let held = self.pool_ref().tails.len(lin);
            self.ops += 1;
            if held > target {
                let p = self.pool_mut();
                let e = p.tails.front(lin).expect("held > 0");
                p.tails.remove(e);
                p.pools.remove(e);
                p.tails.push_back(lout, e);
            } else if held < target {
                let e = self.pool_ref().tails.front(lout).expect("target ≤ out-degree");
                let z = self.head_of(e, w);
                if self.dk[z as usize] == d {
                    let p = self.pool_mut();
                    p.tails.remove(e);
                    p.tails.push_back(lin, e);
                    p.pools.push_back(z as usize, e);
                } else {
                    self.pool_mut().tails.remove(e);
                    self.admit(e, w, z, out);
                }
            } else {
                break;
            }
        }
    }

    /// Consistency of the pool structures; `Ok` for the scan variant.
    pub fn check_pools(&self) -> std::result::Result<(), String> {
        let Some(p) = &self.pool else {
            return Ok(());
        };
        p.orient.check()?;
        let d = self.params.d;
        let n = self.n();
        let mut listed = 0usize;
        for w in 0..n {
            let wn = w as NodeId;
            for (list, in_pool) in [(2 * w, true), (2 * w + 1, false)] {
                for e in p.tails.iter(list) {
                    listed += 1;
                    let Some((a, b)) = self.graph.endpoints(e) else {
                        return Err(format!("dead edge {e} listed under {w}"));
                    };
                    if self.in_k[e] {
                        return Err(format!("kernel edge ({a}, {b}) listed"));
                    }
                    if p.orient.tail(a, b) != Some(wn) {
                        return Err(format!("edge ({a}, {b}) listed under non-tail {w}"));
                    }
                    let z = if a == wn { b } else { a };
                    let pooled = p.pools.owner(e) == Some(z as usize);
                    if pooled != in_pool {
                        return Err(format!("edge ({a}, {b}) pool flag mismatch"));
                    }
                }
            }
            let held = p.tails.len(2 * w);
            let target = self.quota(wn, p.r_used[w]);
            if held != target {
                return Err(format!("node {w} in {held} pools, quota {target}"));
            }
            if held > 0 && self.dk[w] >= d {
                return Err(format!("full node {w} still pooled"));
            }
            if p.pools.len(w) > 0 && self.dk[w] != d {
                return Err(format!("pool of {w} non-empty at kernel degree {}", self.dk[w]));
            }
        }
        let non_kernel = self.graph.m() - self.size;
        if listed != non_kernel {
            return Err(format!("{listed} listed edges, {non_kernel} non-kernel edges"));
        }
        Ok(())
    }
}
