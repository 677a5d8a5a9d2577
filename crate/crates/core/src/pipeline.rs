//! The composed algorithms.
//!
//! `TwoPlusEps` keeps a kernel and runs the bounded-degree stability matcher
//! on it. `BeatTwo` adds approximate kernel degrees, the threshold
//! subgraphs, one recourse-limited bipartite matcher per subgraph, and runs
//! the stability matcher on the augmented kernel `AK = E_K ∪ A`, where `A`
//! is the union of the bipartite matchers' outputs.
//!
//! Both run at an edge-count scale `m̂`. When `m` drifts away from `m̂` by a
//! constant factor, a fresh instance at the new scale is brought up to date
//! a few edges per update while the old one keeps serving; at the end of the
//! window the output switches over.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::bipartite::BipartiteMatcher;
use crate::degrees::{Family, SubgraphStar, ThresholdParams, ThresholdSubgraphs};
use crate::error::{invalid, Error, Result};
use crate::graph::{key, DynamicGraph, NodeId, UpdateEvent, UpdateKind};
use crate::kernel::{Kernel, KernelParams, Variant};
use crate::matching::Matching;
use crate::recourse::RECOURSE_CONSTANT;
use crate::reductions::SparsifiedView;
use crate::stability::PhaseMatcher;

pub const ANALYSIS_EPS: f64 = 2e-8;
pub const ANALYSIS_DELTA: f64 = 2e-6;
pub const ANALYSIS_S: f64 = 2e-4;

/// Smallest edge-count scale.
pub const MIN_M_HAT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineVariant {
    TwoPlusEps,
    BeatTwo,
}

impl fmt::Display for PipelineVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineVariant::TwoPlusEps => "two_plus_eps",
            PipelineVariant::BeatTwo => "beat_two",
        })
    }
}

impl FromStr for PipelineVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_plus_eps" => Ok(PipelineVariant::TwoPlusEps),
            "beat_two" => Ok(PipelineVariant::BeatTwo),
            _ => Err(invalid("variant", format!("unknown variant {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeChoice {
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub variant: PipelineVariant,
    pub eps: f64,
    pub delta: f64,
    pub s: f64,
    pub d: DegreeChoice,
    pub sparsify: bool,
    pub kernel: Variant,
}

impl PipelineConfig {
    /// Parameters usable at desk scale.
    pub fn desk(variant: PipelineVariant) -> Self {
        let eps = match variant {
            PipelineVariant::TwoPlusEps => 0.1,
            PipelineVariant::BeatTwo => 0.05,
        };
        PipelineConfig {
            variant,
            eps,
            delta: 0.02,
            s: 0.2,
            d: DegreeChoice::Auto,
            sparsify: false,
            kernel: Variant::Pool,
        }
    }

    /// The constants the approximation analysis is carried out with.
    pub fn analysis(variant: PipelineVariant) -> Self {
        PipelineConfig {
            eps: ANALYSIS_EPS,
            delta: ANALYSIS_DELTA,
            s: ANALYSIS_S,
            ..PipelineConfig::desk(variant)
        }
    }

    /// Parse `key=value` lines; blank lines and `#` comments are ignored.
    /// Keys: `variant`, `eps`, `delta`, `s`, `d`, `sparsify`, `kernel`.
    /// Missing keys keep the desk defaults of the chosen variant.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(Error::Parse {
                line: i + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let variant = match pairs.iter().find(|p| p.1 == "variant") {
            Some((line, _, v)) => v.parse().map_err(|_| Error::Parse {
                line: *line,
                msg: format!("unknown variant {v:?}"),
            })?,
            None => PipelineVariant::TwoPlusEps,
        };
        let mut cfg = PipelineConfig::desk(variant);
        for (line, k, v) in pairs {
            let bad = |msg: String| Error::Parse { line, msg };
            let real = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("{k}: not a number: {v:?}")));
            match k.as_str() {
                "variant" => {}
                "eps" => cfg.eps = real(&v)?,
                "delta" => cfg.delta = real(&v)?,
                "s" => cfg.s = real(&v)?,
                "d" => {
                    cfg.d = if v == "auto" {
                        DegreeChoice::Auto
                    } else {
                        DegreeChoice::Fixed(v.parse().map_err(|_| bad(format!("d: expected auto or an integer, got {v:?}")))?)
                    }
                }
                "sparsify" => {
                    cfg.sparsify = match v.as_str() {
                        "on" => true,
                        "off" => false,
                        _ => return Err(bad(format!("sparsify: expected on or off, got {v:?}"))),
                    }
                }
                "kernel" => {
                    cfg.kernel = match v.as_str() {
                        "scan" => Variant::Scan,
                        "pool" => Variant::Pool,
                        _ => return Err(bad(format!("kernel: expected scan or pool, got {v:?}"))),
                    }
                }
                _ => return Err(bad(format!("unknown key {k:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.eps;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid("eps", format!("{eps} not in (0, 1/2)")));
        }
        if let DegreeChoice::Fixed(d) = self.d {
            if (d as f64) < 1.0 / eps - 1e-9 {
                return Err(invalid("d", format!("{d} is below 1/eps")));
            }
        }
        match self.variant {
            PipelineVariant::TwoPlusEps => {
                if eps > 1.0 / 3.0 {
                    return Err(invalid("eps", "the output matcher needs eps <= 1/3"));
                }
            }
            PipelineVariant::BeatTwo => {
                if eps >= 1.0 / 6.0 {
                    return Err(invalid("eps", "the bipartite matchers need eps < 1/6"));
                }
                if !(eps < self.s && self.s < 1.0) {
                    return Err(invalid("s", format!("need eps < s < 1, got s = {}", self.s)));
                }
                if !(self.delta > 0.0 && self.delta < self.s) {
                    return Err(invalid("delta", format!("need 0 < delta < s, got {}", self.delta)));
                }
            }
        }
        if self.sparsify && eps >= 1.0 {
            return Err(invalid("eps", "sparsifier needs eps < 1"));
        }
        Ok(())
    }

    /// Kernel degree at scale `m_hat`, never below `ceil(1/eps)`.
    pub fn degree_for(&self, m_hat: usize) -> usize {
        let floor = (1.0 / self.eps - 1e-9).ceil() as usize;
        match self.d {
            DegreeChoice::Fixed(d) => d,
            DegreeChoice::Auto => {
                let m = m_hat.max(1) as f64;
                let d = match self.variant {
                    PipelineVariant::TwoPlusEps => (m.powf(0.25) / self.eps.sqrt()).ceil(),
                    PipelineVariant::BeatTwo => m.powf(0.375).ceil(),
                };
                (d as usize).max(floor)
            }
        }
    }

    /// Index count `ceil(1/eps)` per subgraph family.
    pub fn index_count(&self) -> usize {
        (1.0 / self.eps - 1e-9).ceil() as usize
    }

    /// Bound on the maximum degree of `AK` at kernel degree `d`.
    pub fn ak_degree_bound(&self, d: usize) -> usize {
        match self.variant {
            PipelineVariant::TwoPlusEps => d,
            PipelineVariant::BeatTwo => d + 4 * self.index_count(),
        }
    }

    /// Factor `f` with `f·|output| ≥ μ(G)` at every step.
    pub fn approx_factor(&self) -> f64 {
        let eps = self.eps;
        match self.variant {
            PipelineVariant::TwoPlusEps => (1.0 + eps) * (2.0 + eps) * if self.sparsify { 1.0 + eps } else { 1.0 },
            PipelineVariant::BeatTwo => (2.0 + 8.0 * eps) * (1.0 + self.delta / 8.0) * (1.0 + eps),
        }
    }

    /// Bound on `AK` changes in an update that caused `sparse_events`
    /// updates to the kernel's host graph.
    pub fn ak_change_bound(&self, sparse_events: usize) -> usize {
        let a = match self.variant {
            PipelineVariant::TwoPlusEps => 0,
            PipelineVariant::BeatTwo => 2 * self.index_count() * self.matcher_recourse(),
        };
        3 * sparse_events + a
    }

    /// Per-update recourse bound of one bipartite matcher.
    pub fn matcher_recourse(&self) -> usize {
        (RECOURSE_CONSTANT / self.eps).ceil() as usize
    }
}

impl fmt::Display for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variant={}", self.variant)?;
        writeln!(f, "eps={}", self.eps)?;
        writeln!(f, "delta={}", self.delta)?;
        writeln!(f, "s={}", self.s)?;
        match self.d {
            DegreeChoice::Auto => writeln!(f, "d=auto")?,
            DegreeChoice::Fixed(d) => writeln!(f, "d={d}")?,
        }
        writeln!(f, "sparsify={}", if self.sparsify { "on" } else { "off" })?;
        writeln!(
            f,
            "kernel={}",
            match self.kernel {
                Variant::Scan => "scan",
                Variant::Pool => "pool",
            }
        )
    }
}

/// Per-update counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateStats {
    /// Updates to the sparsified graph (equals one without sparsification).
    pub sparse_events: usize,
    pub kernel_changes: usize,
    pub stars: usize,
    /// Changes to the union of the bipartite matchers' outputs.
    pub a_changes: usize,
    /// Largest change count of a single bipartite matcher.
    pub max_matcher_changes: usize,
    pub ak_changes: usize,
    pub output_changes: usize,
    pub ops_sparsify: u64,
    pub ops_kernel: u64,
    pub ops_degrees: u64,
    pub ops_matchers: u64,
    pub ops_output: u64,
    /// Work spent on a scale change running in the background.
    pub ops_rebuild: u64,
}

impl UpdateStats {
    pub fn ops_total(&self) -> u64 {
        self.ops_sparsify + self.ops_kernel + self.ops_degrees + self.ops_matchers + self.ops_output + self.ops_rebuild
    }
}

/// Net membership change of one subgraph edge within an update.
#[derive(Debug, Clone, Copy)]
struct Net {
    before: Option<NodeId>,
    after: Option<NodeId>,
}

/// One instance of the chain at a fixed scale.
#[derive(Debug, Clone)]
struct Stage {
    cfg: PipelineConfig,
    m_hat: usize,
    d: usize,
    sparsifier: Option<SparsifiedView>,
    kernel: Kernel,
    subgraphs: Option<ThresholdSubgraphs>,
    // slot order: ascending i, SH before H
    matchers: Vec<BipartiteMatcher>,
    // per AK edge: (in the kernel, number of matchers holding it)
    ak: HashMap<(NodeId, NodeId), (bool, u32)>,
    ak_deg: Vec<usize>,
    out: PhaseMatcher,
}

impl Stage {
    fn new(n: usize, cfg: &PipelineConfig, m_hat: usize) -> Result<Self> {
        let d = cfg.degree_for(m_hat);
        let kernel = Kernel::new(n, KernelParams::new(cfg.eps, d)?, cfg.kernel);
        let sparsifier = if cfg.sparsify {
            Some(SparsifiedView::new(n, cfg.eps, m_hat)?)
        } else {
            None
        };
        let (subgraphs, matchers, out) = match cfg.variant {
            PipelineVariant::TwoPlusEps => (None, Vec::new(), PhaseMatcher::stability(n, cfg.eps, d)?),
            PipelineVariant::BeatTwo => {
                let params = ThresholdParams {
                    eps: cfg.eps,
                    s: cfg.s,
                    d,
                };
                let alpha = cfg.eps * cfg.eps * d as f64;
                let max_degree = match &sparsifier {
                    Some(sv) => sv.capacity().min(n.saturating_sub(1)).max(1),
                    None => n.saturating_sub(1).max(1),
                };
                let ts = ThresholdSubgraphs::new(n, params, alpha, max_degree)?;
                let k = ts.count();
                let mut ms = Vec::with_capacity(2 * k);
                for _ in 0..2 * k {
                    ms.push(BipartiteMatcher::new(n, cfg.eps)?);
                }
                let out = PhaseMatcher::stability(n, cfg.delta / 8.0, cfg.ak_degree_bound(d))?;
                (Some(ts), ms, out)
            }
        };
        Ok(Stage {
            cfg: *cfg,
            m_hat,
            d,
            sparsifier,
            kernel,
            subgraphs,
            matchers,
            ak: HashMap::new(),
            ak_deg: vec![0; n],
            out,
        })
    }

    fn slot(&self, family: Family, i: usize) -> usize {
        2 * (i - 1)
            + match family {
                Family::SH => 0,
                Family::H => 1,
            }
    }

    fn ops(&self) -> u64 {
        self.sparsifier.as_ref().map_or(0, |s| s.ops())
            + self.kernel.ops()
            + self.subgraphs.as_ref().map_or(0, |t| t.ops())
            + self.matchers.iter().map(|m| m.ops()).sum::<u64>()
            + self.out.ops()
            + self.out.graph().ops()
    }

    fn ak_touch(&mut self, u: NodeId, v: NodeId, kernel: Option<bool>, a: i32, evs: &mut Vec<UpdateEvent>) {
        let k = key(u, v);
        let e = self.ak.entry(k).or_insert((false, 0));
        let before = e.0 || e.1 > 0;
        if let Some(inside) = kernel {
            e.0 = inside;
        }
        e.1 = (e.1 as i64 + a as i64) as u32;
        let after = e.0 || e.1 > 0;
        if !after {
            self.ak.remove(&k);
        }
        if before != after {
            let (du, dv) = (&mut self.ak_deg, k);
            if after {
                du[dv.0 as usize] += 1;
                du[dv.1 as usize] += 1;
                evs.push(UpdateEvent::insert(k.0, k.1));
            } else {
                du[dv.0 as usize] -= 1;
                du[dv.1 as usize] -= 1;
                evs.push(UpdateEvent::delete(k.0, k.1));
            }
        }
    }

    fn absorb(&self, stars: Vec<SubgraphStar>, nets: &mut [BTreeMap<(NodeId, NodeId), Net>], count: &mut usize) {
        for st in stars {
            *count += 1;
            let slot = self.slot(st.family, st.index);
            let c = st.star.center;
            for &w in &st.star.leaves {
                let high = if st.center_high { c } else { w };
                let present = st.star.kind == UpdateKind::Insert;
                let e = nets[slot].entry(key(c, w)).or_insert(Net {
                    before: if present { None } else { Some(high) },
                    after: None,
                });
                e.after = present.then_some(high);
            }
        }
    }

    fn update(&mut self, ev: &UpdateEvent, stats: &mut UpdateStats) -> Result<Vec<UpdateEvent>> {
        let ops0 = [
            self.sparsifier.as_ref().map_or(0, |s| s.ops()),
            self.kernel.ops(),
            self.subgraphs.as_ref().map_or(0, |t| t.ops()),
            self.matchers.iter().map(|m| m.ops()).sum::<u64>(),
            self.out.ops() + self.out.graph().ops(),
        ];
        let g_events = match &mut self.sparsifier {
            Some(sv) => sv.update(ev)?,
            None => vec![*ev],
        };
        stats.sparse_events += g_events.len();
        let beat = self.cfg.variant == PipelineVariant::BeatTwo;
        let mut nets: Vec<BTreeMap<(NodeId, NodeId), Net>> = vec![BTreeMap::new(); self.matchers.len()];
        let mut ak_events = Vec::new();
        for ge in &g_events {
            if beat {
                let ts = self.subgraphs.as_mut().unwrap();
                let stars = match ge.kind {
                    UpdateKind::Insert => ts.insert_edge(ge.u, ge.v)?,
                    UpdateKind::Delete => ts.delete_edge(ge.u, ge.v)?,
                };
                self.absorb(stars, &mut nets, &mut stats.stars);
            }
            for ch in self.kernel.apply(ge)? {
                stats.kernel_changes += 1;
                let inside = ch.is_insert();
                self.ak_touch(ch.event.u, ch.event.v, Some(inside), 0, &mut ak_events);
                if beat {
                    let stars = self.subgraphs.as_mut().unwrap().on_kernel_change(&ch.event)?;
                    self.absorb(stars, &mut nets, &mut stats.stars);
                }
            }
        }
        if beat {
            for (slot, net) in nets.into_iter().enumerate() {
                if net.is_empty() {
                    continue;
                }
                let mut dels = Vec::new();
                let mut ins = Vec::new();
                for (&(a, b), e) in &net {
                    if e.before == e.after {
                        continue;
                    }
                    if e.before.is_some() {
                        dels.push((a, b));
                    }
                    if let Some(h) = e.after {
                        ins.push((h, if h == a { b } else { a }));
                    }
                }
                if dels.is_empty() && ins.is_empty() {
                    continue;
                }
                let changes = self.matchers[slot].apply_batch(&dels, &ins)?;
                stats.a_changes += changes.len();
                stats.max_matcher_changes = stats.max_matcher_changes.max(changes.len());
                for ch in changes {
                    let a = if ch.kind == UpdateKind::Insert { 1 } else { -1 };
                    self.ak_touch(ch.u, ch.v, None, a, &mut ak_events);
                }
            }
        }
        stats.ak_changes += ak_events.len();
        let out = self.out.update_batch(&ak_events)?;
        let ops1 = [
            self.sparsifier.as_ref().map_or(0, |s| s.ops()),
            self.kernel.ops(),
            self.subgraphs.as_ref().map_or(0, |t| t.ops()),
            self.matchers.iter().map(|m| m.ops()).sum::<u64>(),
            self.out.ops() + self.out.graph().ops(),
        ];
        stats.ops_sparsify += ops1[0] - ops0[0];
        stats.ops_kernel += ops1[1] - ops0[1];
        stats.ops_degrees += ops1[2] - ops0[2];
        stats.ops_matchers += ops1[3] - ops0[3];
        stats.ops_output += ops1[4] - ops0[4];
        Ok(out)
    }
}

/// A scale change in progress.
#[derive(Debug, Clone)]
struct Rebuild {
    stage: Stage,
    pending: BTreeSet<(NodeId, NodeId)>,
    per_update: usize,
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    graph: DynamicGraph,
    active: Stage,
    rebuild: Option<Rebuild>,
    output: Matching,
    updates: u64,
    rescales: u64,
}

impl Pipeline {
    pub fn new(n: usize, cfg: PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Pipeline {
            cfg,
            graph: DynamicGraph::new(n),
            active: Stage::new(n, &cfg, MIN_M_HAT)?,
            rebuild: None,
            output: Matching::new(n),
            updates: 0,
            rescales: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn output_matching(&self) -> &Matching {
        &self.output
    }

    /// Kernel degree of the serving instance.
    pub fn d(&self) -> usize {
        self.active.d
    }

    pub fn m_hat(&self) -> usize {
        self.active.m_hat
    }

    pub fn rescales(&self) -> u64 {
        self.rescales
    }

    pub fn is_rebuilding(&self) -> bool {
        self.rebuild.is_some()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.active.kernel
    }

    /// The graph the kernel is maintained on (the sparsified graph when
    /// sparsification is on).
    pub fn host(&self) -> &DynamicGraph {
        match &self.active.sparsifier {
            Some(sv) => sv.sparse(),
            None => &self.graph,
        }
    }

    pub fn sparsifier(&self) -> Option<&SparsifiedView> {
        self.active.sparsifier.as_ref()
    }

    pub fn subgraphs(&self) -> Option<&ThresholdSubgraphs> {
        self.active.subgraphs.as_ref()
    }

    /// Bipartite matchers in slot order (ascending index, SH before H).
    pub fn matchers(&self) -> &[BipartiteMatcher] {
        &self.active.matchers
    }

    /// Edges of the augmented kernel, ascending.
    pub fn ak_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut e: Vec<_> = self.active.ak.keys().copied().collect();
        e.sort_unstable();
        e
    }

    pub fn ak_max_degree(&self) -> usize {
        self.active.ak_deg.iter().copied().max().unwrap_or(0)
    }

    /// Edges of `A`, the union of the bipartite matchers' outputs, ascending.
    pub fn a_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut e: Vec<_> = self
            .active
            .ak
            .iter()
            .filter(|(_, c)| c.1 > 0)
            .map(|(k, _)| *k)
            .collect();
        e.sort_unstable();
        e
    }

    pub fn ops(&self) -> u64 {
        self.active.ops() + self.rebuild.as_ref().map_or(0, |r| r.stage.ops())
    }

    fn target_scale(&self) -> Option<usize> {
        let m = self.graph.m();
        let cur = self.active.m_hat;
        let next = m.max(1).next_power_of_two().max(MIN_M_HAT);
        if m > 2 * cur || (cur > MIN_M_HAT && 4 * m < cur) {
            Some(next)
        } else {
            None
        }
    }

    /// Process one graph update; returns the output matching's changes.
    pub fn update(&mut self, ev: &UpdateEvent) -> Result<(Vec<UpdateEvent>, UpdateStats)> {
        self.graph.apply(ev)?;
        self.updates += 1;
        let mut stats = UpdateStats::default();
        let mut changes = self.active.update(ev, &mut stats)?;

        let mut switch = false;
        if let Some(rb) = &mut self.rebuild {
            let before = rb.stage.ops();
            let mut scratch = UpdateStats::default();
            let k = key(ev.u, ev.v);
            match ev.kind {
                UpdateKind::Insert => {
                    rb.stage.update(ev, &mut scratch)?;
                }
                UpdateKind::Delete => {
                    if !rb.pending.remove(&k) {
                        rb.stage.update(ev, &mut scratch)?;
                    }
                }
            }
            for _ in 0..rb.per_update {
                let Some((a, b)) = rb.pending.pop_first() else { break };
                rb.stage.update(&UpdateEvent::insert(a, b), &mut scratch)?;
            }
            stats.ops_rebuild = rb.stage.ops() - before;
            switch = rb.pending.is_empty();
        } else if let Some(m_hat) = self.target_scale() {
            let stage = Stage::new(self.graph.n(), &self.cfg, m_hat)?;
            let pending: BTreeSet<_> = self.graph.edges().collect();
            let window = self.active.m_hat.max(1);
            let per_update = pending.len().div_ceil(window).max(1);
            self.rebuild = Some(Rebuild {
                stage,
                pending,
                per_update,
            });
        }

        if switch {
            let rb = self.rebuild.take().unwrap();
            self.active = rb.stage;
            self.rescales += 1;
            let fresh = self.active.out.matching();
            // replace the output wholesale: removals first
            changes.clear();
            for (u, v) in self.output.edges() {
                if !fresh.contains(u, v) {
                    changes.push(UpdateEvent::delete(u, v));
                }
            }
            for (u, v) in fresh.edges() {
                if !self.output.contains(u, v) {
                    changes.push(UpdateEvent::insert(u, v));
                }
            }
            self.output = fresh;
        } else {
            let mut touched = BTreeMap::new();
            for ch in &changes {
                let k = key(ch.u, ch.v);
                touched.entry(k).or_insert(self.output.contains(k.0, k.1));
                match ch.kind {
                    UpdateKind::Insert => self.output.add(ch.u, ch.v),
                    UpdateKind::Delete => {
                        self.output.remove(ch.u, ch.v);
                    }
                }
            }
            // report only the net difference, removals first
            let (mut dels, mut ins) = (Vec::new(), Vec::new());
            for ((u, v), was) in touched {
                match (was, self.output.contains(u, v)) {
                    (true, false) => dels.push(UpdateEvent::delete(u, v)),
                    (false, true) => ins.push(UpdateEvent::insert(u, v)),
                    _ => {}
                }
            }
            dels.extend(ins);
            changes = dels;
        }
        stats.output_changes = changes.len();
        Ok((changes, stats))
    }
}
