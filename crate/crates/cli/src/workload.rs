//! Deterministic workload generators.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use anyhow::{bail, ensure, Result};
use dynmatch::graph::key;
use dynmatch::pipeline::{Pipeline, PipelineConfig};
use dynmatch::{NodeId, UpdateEvent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum WorkloadKind {
    UniformRandom,
    SlidingWindow,
    DeleteMatchedAdversary,
    GadgetFamily,
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkloadKind::UniformRandom => "uniform-random",
            WorkloadKind::SlidingWindow => "sliding-window",
            WorkloadKind::DeleteMatchedAdversary => "delete-matched-adversary",
            WorkloadKind::GadgetFamily => "gadget-family",
        })
    }
}

impl FromStr for WorkloadKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, false).map_err(|e| anyhow::anyhow!(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub seed: u64,
    pub nodes: usize,
    pub events: usize,
    /// Live edges at steady state (sliding window).
    pub window: usize,
    /// Number of length-three gadgets (gadget family).
    pub gadgets: usize,
    /// Probability of a deletion when one is possible.
    pub delete_prob: f64,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, seed: u64, nodes: usize, events: usize) -> Self {
        WorkloadSpec {
            kind,
            seed,
            nodes,
            events,
            window: (nodes * 2).max(1),
            gadgets: 50,
            delete_prob: 0.4,
        }
    }

    /// Nodes the stream uses.
    pub fn node_count(&self) -> usize {
        match self.kind {
            WorkloadKind::GadgetFamily => 4 * self.gadgets,
            _ => self.nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            WorkloadKind::GadgetFamily => ensure!(self.gadgets > 0, "gadget family needs at least one gadget"),
            _ => ensure!(self.nodes >= 2, "need at least two nodes"),
        }
        ensure!((0.0..=1.0).contains(&self.delete_prob), "delete probability outside [0, 1]");
        if self.kind == WorkloadKind::SlidingWindow {
            let max = self.nodes * (self.nodes - 1) / 2;
            ensure!(self.window >= 1 && self.window < max, "window must be in 1..{max}");
        }
        Ok(())
    }
}

/// Live edge set with O(1) random choice.
#[derive(Debug, Default)]
struct Live {
    edges: Vec<(NodeId, NodeId)>,
    pos: std::collections::HashMap<(NodeId, NodeId), usize>,
}

impl Live {
    fn contains(&self, e: (NodeId, NodeId)) -> bool {
        self.pos.contains_key(&e)
    }

    fn insert(&mut self, e: (NodeId, NodeId)) {
        self.pos.insert(e, self.edges.len());
        self.edges.push(e);
    }

    fn remove(&mut self, e: (NodeId, NodeId)) {
        let i = self.pos.remove(&e).expect("live edge");
        self.edges.swap_remove(i);
        if i < self.edges.len() {
            self.pos.insert(self.edges[i], i);
        }
    }

    fn len(&self) -> usize {
        self.edges.len()
    }
}

fn fresh_edge(rng: &mut ChaCha8Rng, n: usize, live: &Live) -> Option<(NodeId, NodeId)> {
    let max = n * (n - 1) / 2;
    if live.len() >= max {
        return None;
    }
    loop {
        let u = rng.gen_range(0..n as NodeId);
        let v = rng.gen_range(0..n as NodeId);
        if u != v && !live.contains(key(u, v)) {
            return Some(key(u, v));
        }
    }
}

/// Generate a stream. The adversary needs the pipeline it plays against;
/// `cfg` is ignored for the other kinds.
pub fn generate(spec: &WorkloadSpec, cfg: &PipelineConfig) -> Result<Vec<UpdateEvent>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.node_count();
    let mut live = Live::default();
    let mut out = Vec::with_capacity(spec.events);
    match spec.kind {
        WorkloadKind::UniformRandom => {
            while out.len() < spec.events {
                let del = live.len() > 0 && rng.gen_bool(spec.delete_prob);
                let ev = match (del, fresh_edge(&mut rng, n, &live)) {
                    (false, Some(e)) => UpdateEvent::insert(e.0, e.1),
                    _ => {
                        let e = live.edges[rng.gen_range(0..live.len())];
                        UpdateEvent::delete(e.0, e.1)
                    }
                };
                apply(&mut live, &ev);
                out.push(ev);
            }
        }
        WorkloadKind::SlidingWindow => {
            let mut order: VecDeque<(NodeId, NodeId)> = VecDeque::new();
            while out.len() < spec.events {
                let ev = if live.len() >= spec.window {
                    let e = order.pop_front().unwrap();
                    UpdateEvent::delete(e.0, e.1)
                } else {
                    let e = fresh_edge(&mut rng, n, &live).unwrap();
                    order.push_back(e);
                    UpdateEvent::insert(e.0, e.1)
                };
                apply(&mut live, &ev);
                out.push(ev);
            }
        }
        WorkloadKind::DeleteMatchedAdversary => {
            let mut p = Pipeline::new(n, *cfg)?;
            while out.len() < spec.events {
                let matched = p.output_matching().edges();
                let ev = if live.len() > 0 && rng.gen_bool(spec.delete_prob) {
                    let e = if matched.is_empty() {
                        live.edges[rng.gen_range(0..live.len())]
                    } else {
                        matched[rng.gen_range(0..matched.len())]
                    };
                    UpdateEvent::delete(e.0, e.1)
                } else if let Some(e) = fresh_edge(&mut rng, n, &live) {
                    UpdateEvent::insert(e.0, e.1)
                } else {
                    let e = live.edges[rng.gen_range(0..live.len())];
                    UpdateEvent::delete(e.0, e.1)
                };
                apply(&mut live, &ev);
                p.update(&ev)?;
                out.push(ev);
            }
        }
        WorkloadKind::GadgetFamily => out = gadget_family(spec.gadgets),
    }
    Ok(out)
}

fn apply(live: &mut Live, ev: &UpdateEvent) {
    let e = key(ev.u, ev.v);
    match ev.kind {
        dynmatch::UpdateKind::Insert => live.insert(e),
        dynmatch::UpdateKind::Delete => live.remove(e),
    }
}

/// `k` node-disjoint length-three paths `a_j - b_j - c_j - e_j` whose middle
/// nodes are joined by a complete bipartite core between the `b`s and the
/// `c`s. The core is inserted first, so once the middle nodes saturate the
/// kernel the outer path edges stay outside it. The maximum matching uses
/// every outer edge and has size `2k`.
///
/// Node ids: `b_j = j`, `c_j = k + j`, `a_j = 2k + j`, `e_j = 3k + j`.
pub fn gadget_family(k: usize) -> Vec<UpdateEvent> {
    let k = k as NodeId;
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            out.push(UpdateEvent::insert(i, k + j));
        }
    }
    for j in 0..k {
        out.push(UpdateEvent::insert(2 * k + j, j));
        out.push(UpdateEvent::insert(k + j, 3 * k + j));
    }
    out
}

/// Validate a stream against an evolving edge set; returns the node count
/// needed to replay it.
pub fn check_stream(events: &[UpdateEvent]) -> Result<usize> {
    let mut live = BTreeSet::new();
    let mut n = 0usize;
    for (i, ev) in events.iter().enumerate() {
        if ev.u == ev.v {
            bail!("event {}: self-loop on {}", i + 1, ev.u);
        }
        n = n.max(ev.u.max(ev.v) as usize + 1);
        let e = key(ev.u, ev.v);
        let ok = match ev.kind {
            dynmatch::UpdateKind::Insert => live.insert(e),
            dynmatch::UpdateKind::Delete => live.remove(&e),
        };
        if !ok {
            bail!("event {}: {ev} is invalid against the current graph", i + 1);
        }
    }
    Ok(n)
}
