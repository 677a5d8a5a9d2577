//! Phase-based matching maintenance for bounded-degree graphs.
//!
//! A phase that starts with matching `M` lasts `⌊ε′|M|⌋ + 1` updates. At its
//! start the graph is frozen as a snapshot (kept as the live graph plus a
//! small overlay of the edges changed since), and a static matching of the
//! snapshot is computed a chunk at a time across the phase. At the phase
//! boundary the result, minus edges deleted in the meantime, replaces the
//! live matching. Deleted matched edges leave the live matching at once,
//! and an edge inserted between two free vertices is matched at once.
//! While `ε′|M| < 1` every phase is a single update, and with a maximum
//! target the live graph is augmented to a maximum matching directly.

use std::collections::BTreeSet;

use crate::blossom::{maximum_matching, Roots, Search, Step};
use crate::error::{invalid, Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, UpdateEvent, UpdateKind};
use crate::matching::{Adjacency, Matching, FREE};

/// Static matching with no augmenting path at all, so in particular none of
/// length `≤ 2⌈1/ε⌉ − 1`.
pub fn static_near_max<A: Adjacency + ?Sized>(g: &A, eps: f64) -> Result<Matching> {
    if !(eps > 0.0 && eps <= 1.0 / 3.0 + 1e-12) {
        return Err(invalid("eps", format!("{eps} is outside (0, 1/3]")));
    }
    Ok(Matching::from_mates(maximum_matching(g)))
}

/// What the per-phase static computation aims for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// A maximum matching of the snapshot.
    Maximum,
    /// A maximal matching with no augmenting path of length one or three.
    NoShortPaths,
}

/// The graph as it stood at the start of the current phase.
struct Snapshot<'a> {
    live: &'a DynamicGraph,
    inserted: &'a BTreeSet<(NodeId, NodeId)>,
    deleted_adj: &'a [Vec<NodeId>],
}

impl Adjacency for Snapshot<'_> {
    fn node_count(&self) -> usize {
        self.live.n()
    }

    fn neighbors_into(&self, v: NodeId, out: &mut Vec<NodeId>) {
        let skip = !self.inserted.is_empty();
        out.extend(
            self.live
                .neighbors(v)
                .filter(|&w| !skip || !self.inserted.contains(&key(v, w))),
        );
        out.extend_from_slice(&self.deleted_adj[v as usize]);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Greedy(usize),
    Search { started: bool },
    Short { at: usize, found: usize },
    Done,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseStats {
    pub phases: u64,
    /// Phases whose rebuild was not finished by the regular chunks.
    pub late_phases: u64,
}

#[derive(Debug, Clone)]
pub struct PhaseMatcher {
    eps_inner: f64,
    max_degree: Option<usize>,
    target: Target,
    graph: DynamicGraph,
    mate: Vec<NodeId>,
    size: usize,
    phase_len: usize,
    phase_pos: usize,
    inserted: BTreeSet<(NodeId, NodeId)>,
    deleted: BTreeSet<(NodeId, NodeId)>,
    deleted_adj: Vec<Vec<NodeId>>,
    touched: Vec<NodeId>,
    smate: Vec<NodeId>,
    stage: Stage,
    search: Search,
    chunk: u64,
    work: u64,
    ops: u64,
    stats: PhaseStats,
    buf: Vec<NodeId>,
}

impl PhaseMatcher {
    /// `eps_inner` is the phase parameter `ε′`.
    pub fn new(n: usize, eps_inner: f64, max_degree: Option<usize>, target: Target) -> Self {
        let mut s = PhaseMatcher {
            eps_inner,
            max_degree,
            target,
            graph: DynamicGraph::new(n),
            mate: vec![FREE; n],
            size: 0,
            phase_len: 1,
            phase_pos: 0,
            inserted: BTreeSet::new(),
            deleted: BTreeSet::new(),
            deleted_adj: vec![Vec::new(); n],
            touched: Vec::new(),
            smate: vec![FREE; n],
            stage: Stage::Done,
            search: Search::new(),
            chunk: 1,
            work: 0,
            ops: 0,
            stats: PhaseStats::default(),
            buf: Vec::new(),
        };
        s.start_phase();
        s
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn mate(&self, v: NodeId) -> Option<NodeId> {
        let w = self.mate[v as usize];
        (w != FREE).then_some(w)
    }

    pub fn matching(&self) -> Matching {
        Matching::from_mates(self.mate.clone())
    }

    pub fn phase_len(&self) -> usize {
        self.phase_len
    }

    pub fn stats(&self) -> &PhaseStats {
        &self.stats
    }

    /// Elementary operations performed so far.
    pub fn ops(&self) -> u64 {
        self.ops + self.work + self.graph.ops()
    }

    fn start_phase(&mut self) {
        for &v in &self.touched {
            self.deleted_adj[v as usize].clear();
        }
        self.ops += (self.touched.len() + self.inserted.len() + self.deleted.len()) as u64;
        self.touched.clear();
        self.inserted.clear();
        self.deleted.clear();
        self.smate.copy_from_slice(&self.mate);
        self.ops += self.mate.len() as u64;
        self.phase_len = (self.eps_inner * self.size as f64).floor() as usize + 1;
        self.phase_pos = 0;
        let edges = self.graph.m().max(1) as f64;
        self.chunk = (2.0 * edges / (self.eps_inner * self.phase_len as f64)).ceil() as u64;
        self.stage = Stage::Greedy(0);
        self.stats.phases += 1;
    }

    /// Run the static computation for about `budget` operations; returns true
    /// once it has finished.
    fn advance(&mut self, budget: u64) -> bool {
        let stop = self.work.saturating_add(budget);
        let mut smate = std::mem::take(&mut self.smate);
        let mut search = std::mem::take(&mut self.search);
        let mut buf = std::mem::take(&mut self.buf);
        let n = self.graph.n();
        while self.work < stop && self.stage != Stage::Done {
            let snap = Snapshot {
                live: &self.graph,
                inserted: &self.inserted,
                deleted_adj: &self.deleted_adj,
            };
            match self.stage {
                Stage::Greedy(v) => {
                    if v == n {
                        self.stage = match self.target {
                            Target::Maximum => Stage::Search { started: false },
                            Target::NoShortPaths => Stage::Short { at: 0, found: 0 },
                        };
                        continue;
                    }
                    self.work += 1;
                    if smate[v] == FREE {
                        buf.clear();
                        snap.neighbors_into(v as NodeId, &mut buf);
                        self.work += buf.len() as u64;
                        if let Some(&w) = buf.iter().find(|&&w| smate[w as usize] == FREE) {
                            smate[v] = w;
                            smate[w as usize] = v as NodeId;
                        }
                    }
                    self.stage = Stage::Greedy(v + 1);
                }
                Stage::Search { started } => {
                    let before = search.ops;
                    if !started {
                        search.begin(&snap, &smate, Roots::AllFree, true);
                        self.stage = Stage::Search { started: true };
                    }
                    let left = stop.saturating_sub(self.work);
                    let step = search.run(&snap, &mut smate, left.max(1));
                    self.work += search.ops - before;
                    match step {
                        Step::Pending => {}
                        Step::Done { augmented: 0 } => self.stage = Stage::Done,
                        Step::Done { .. } => self.stage = Stage::Search { started: false },
                    }
                }
                Stage::Short { at, found } => {
                    if at == n {
                        self.stage = if found == 0 {
                            Stage::Done
                        } else {
                            Stage::Short { at: 0, found: 0 }
                        };
                        continue;
                    }
                    self.work += 1;
                    let u = at as NodeId;
                    let v = smate[at];
                    let mut hit = 0;
                    if v != FREE && u < v {
                        buf.clear();
                        snap.neighbors_into(u, &mut buf);
                        let split = buf.len();
                        snap.neighbors_into(v, &mut buf);
                        self.work += buf.len() as u64;
                        let free = |x: NodeId| smate[x as usize] == FREE;
                        let a_side: Vec<NodeId> = buf[..split].iter().copied().filter(|&x| free(x)).take(2).collect();
                        let b_side: Vec<NodeId> = buf[split..].iter().copied().filter(|&x| free(x)).take(2).collect();
                        'pick: for &a in &a_side {
                            for &b in &b_side {
                                if a != b {
                                    smate[a as usize] = u;
                                    smate[u as usize] = a;
                                    smate[b as usize] = v;
                                    smate[v as usize] = b;
                                    hit = 1;
                                    break 'pick;
                                }
                            }
                        }
                    }
                    self.stage = Stage::Short {
                        at: at + 1,
                        found: found + hit,
                    };
                }
                Stage::Done => {}
            }
        }
        self.smate = smate;
        self.search = search;
        self.buf = buf;
        self.stage == Stage::Done
    }

    fn set_mate(&mut self, u: NodeId, v: NodeId, out: &mut Vec<UpdateEvent>) {
        self.mate[u as usize] = v;
        self.mate[v as usize] = u;
        self.size += 1;
        let (a, b) = key(u, v);
        out.push(UpdateEvent::insert(a, b));
    }

    fn unset_mate(&mut self, u: NodeId, v: NodeId, out: &mut Vec<UpdateEvent>) {
        self.mate[u as usize] = FREE;
        self.mate[v as usize] = FREE;
        self.size -= 1;
        let (a, b) = key(u, v);
        out.push(UpdateEvent::delete(a, b));
    }

    fn swap_in(&mut self, out: &mut Vec<UpdateEvent>) {
        let n = self.graph.n();
        for v in 0..n {
            let w = self.smate[v];
            if w != FREE && self.deleted.contains(&key(v as NodeId, w)) {
                self.smate[v] = FREE;
            }
        }
        for v in 0..n {
            let (old, new) = (self.mate[v], self.smate[v]);
            if old != new && old != FREE && (v as NodeId) < old {
                self.unset_mate(v as NodeId, old, out);
            }
        }
        for v in 0..n {
            let new = self.smate[v];
            if new != FREE && (v as NodeId) < new && self.mate[v] != new {
                self.set_mate(v as NodeId, new, out);
            }
        }
        self.ops += 3 * n as u64;
        let fresh: Vec<(NodeId, NodeId)> = self.inserted.iter().copied().collect();
        for (u, v) in fresh {
            self.ops += 1;
            if self.mate[u as usize] == FREE && self.mate[v as usize] == FREE {
                self.set_mate(u, v, out);
            }
        }
    }

    /// Augment the live matching until it is maximum.
    fn settle(&mut self, out: &mut Vec<UpdateEvent>) {
        let mut mate = self.mate.clone();
        let mut search = std::mem::take(&mut self.search);
        let before = search.ops;
        while search.augment(&self.graph, &mut mate, Roots::AllFree) {}
        self.ops += search.ops - before + self.mate.len() as u64;
        self.search = search;
        for v in 0..mate.len() {
            let old = self.mate[v];
            if old != mate[v] && old != FREE && (v as NodeId) < old {
                self.unset_mate(v as NodeId, old, out);
            }
        }
        for v in 0..mate.len() {
            let new = mate[v];
            if new != FREE && (v as NodeId) < new && self.mate[v] != new {
                self.set_mate(v as NodeId, new, out);
            }
        }
    }

    fn record(&mut self, ev: &UpdateEvent) {
        let k = key(ev.u, ev.v);
        match ev.kind {
            UpdateKind::Insert => {
                if self.deleted.remove(&k) {
                    for (x, y) in [(k.0, k.1), (k.1, k.0)] {
                        let list = &mut self.deleted_adj[x as usize];
                        let i = list.iter().position(|&z| z == y).expect("recorded deletion");
                        list.swap_remove(i);
                    }
                } else {
                    self.inserted.insert(k);
                }
            }
            UpdateKind::Delete => {
                if !self.inserted.remove(&k) {
                    self.deleted.insert(k);
                    for (x, y) in [(k.0, k.1), (k.1, k.0)] {
                        if self.deleted_adj[x as usize].is_empty() {
                            self.touched.push(x);
                        }
                        self.deleted_adj[x as usize].push(y);
                    }
                }
            }
        }
        self.ops += 2;
    }

    fn apply_edge(&mut self, ev: &UpdateEvent, out: &mut Vec<UpdateEvent>) -> Result<()> {
        if ev.kind == UpdateKind::Insert {
            if let Some(bound) = self.max_degree {
                for x in [ev.u, ev.v] {
                    if (x as usize) < self.graph.n() && self.graph.degree(x) >= bound {
                        return Err(Error::DegreeBound { node: x, bound });
                    }
                }
            }
        }
        self.graph.apply(ev)?;
        self.record(ev);
        let (u, v) = (ev.u, ev.v);
        match ev.kind {
            UpdateKind::Delete if self.mate[u as usize] == v => self.unset_mate(u, v, out),
            UpdateKind::Insert if self.mate[u as usize] == FREE && self.mate[v as usize] == FREE => {
                self.set_mate(u, v, out)
            }
            _ => {}
        }
        Ok(())
    }

    /// Process one update; returns the changes to the maintained matching.
    pub fn update(&mut self, ev: &UpdateEvent) -> Result<Vec<UpdateEvent>> {
        self.update_batch(std::slice::from_ref(ev))
    }

    /// Apply several edge updates as a single logical update (one phase
    /// step), as for a star update.
    pub fn update_batch(&mut self, evs: &[UpdateEvent]) -> Result<Vec<UpdateEvent>> {
        let mut out = Vec::new();
        for ev in evs {
            self.apply_edge(ev, &mut out)?;
        }
        let finished = self.advance(self.chunk);
        self.phase_pos += 1;
        if self.phase_pos >= self.phase_len {
            if !finished {
                self.stats.late_phases += 1;
                self.advance(u64::MAX);
            }
            self.swap_in(&mut out);
            if self.target == Target::Maximum && self.eps_inner * (self.size as f64) < 1.0 {
                self.settle(&mut out);
            }
            self.start_phase();
        }
        Ok(out)
    }
}

impl PhaseMatcher {
    /// `(1+ε)`-approximate maintenance in graphs of maximum degree
    /// `max_degree`, with `ε′ = ε/5`.
    pub fn stability(n: usize, eps: f64, max_degree: usize) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0 / 3.0 + 1e-12) {
            return Err(invalid("eps", format!("{eps} is outside (0, 1/3]")));
        }
        Ok(PhaseMatcher::new(n, eps / 5.0, Some(max_degree), Target::Maximum))
    }
}
