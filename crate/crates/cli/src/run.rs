//! Stream replay with per-update metrics and invariant checks.

use std::collections::BTreeMap;

use dynmatch::kernel::check_kernel;
use dynmatch::oracle::IncrementalOracle;
use dynmatch::pipeline::{Pipeline, PipelineConfig, UpdateStats};
use dynmatch::UpdateEvent;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of the metrics CSV.
pub const CSV_COLUMNS: [&str; 21] = [
    "step",
    "op",
    "u",
    "v",
    "m",
    "output_size",
    "sparse_events",
    "kernel_changes",
    "stars",
    "a_changes",
    "ak_changes",
    "output_changes",
    "ops_sparsify",
    "ops_kernel",
    "ops_degrees",
    "ops_matchers",
    "ops_output",
    "ops_rebuild",
    "ops_total",
    "mu",
    "ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Off,
    Sampled,
    Full,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Oracle period in updates; 0 disables the oracle.
    pub oracle_every: usize,
    pub checks: CheckMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            oracle_every: 50,
            checks: CheckMode::Sampled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub step: usize,
    pub op: char,
    pub u: u32,
    pub v: u32,
    pub m: usize,
    pub output_size: usize,
    pub sparse_events: usize,
    pub kernel_changes: usize,
    pub stars: usize,
    pub a_changes: usize,
    pub ak_changes: usize,
    pub output_changes: usize,
    pub ops_sparsify: u64,
    pub ops_kernel: u64,
    pub ops_degrees: u64,
    pub ops_matchers: u64,
    pub ops_output: u64,
    pub ops_rebuild: u64,
    pub ops_total: u64,
    pub mu: Option<usize>,
    pub ratio: Option<f64>,
}

impl MetricsRecord {
    fn new(step: usize, ev: &UpdateEvent, p: &Pipeline, st: &UpdateStats) -> Self {
        MetricsRecord {
            step,
            op: if ev.kind == dynmatch::UpdateKind::Insert { '+' } else { '-' },
            u: ev.u,
            v: ev.v,
            m: p.graph().m(),
            output_size: p.output_matching().len(),
            sparse_events: st.sparse_events,
            kernel_changes: st.kernel_changes,
            stars: st.stars,
            a_changes: st.a_changes,
            ak_changes: st.ak_changes,
            output_changes: st.output_changes,
            ops_sparsify: st.ops_sparsify,
            ops_kernel: st.ops_kernel,
            ops_degrees: st.ops_degrees,
            ops_matchers: st.ops_matchers,
            ops_output: st.ops_output,
            ops_rebuild: st.ops_rebuild,
            ops_total: st.ops_total(),
            mu: None,
            ratio: None,
        }
    }

    fn numeric(&self) -> [(&'static str, f64); 16] {
        [
            ("m", self.m as f64),
            ("output_size", self.output_size as f64),
            ("sparse_events", self.sparse_events as f64),
            ("kernel_changes", self.kernel_changes as f64),
            ("stars", self.stars as f64),
            ("a_changes", self.a_changes as f64),
            ("ak_changes", self.ak_changes as f64),
            ("output_changes", self.output_changes as f64),
            ("ops_sparsify", self.ops_sparsify as f64),
            ("ops_kernel", self.ops_kernel as f64),
            ("ops_degrees", self.ops_degrees as f64),
            ("ops_matchers", self.ops_matchers as f64),
            ("ops_output", self.ops_output as f64),
            ("ops_rebuild", self.ops_rebuild as f64),
            ("ops_total", self.ops_total as f64),
            ("ratio", self.ratio.unwrap_or(f64::NAN)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub step: usize,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckSummary {
    pub evaluated: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Stat {
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub variant: String,
    pub config: String,
    pub nodes: usize,
    pub updates: usize,
    pub final_m: usize,
    pub output_size: usize,
    pub final_mu: Option<usize>,
    pub d: usize,
    pub m_hat: usize,
    pub rescales: u64,
    pub approx_factor: f64,
    pub metrics: BTreeMap<String, Stat>,
    pub checks: BTreeMap<String, CheckSummary>,
    pub check_mode: CheckMode,
    pub oracle_every: usize,
    pub first_violation: Option<Witness>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<MetricsRecord>,
    pub summary: Summary,
}

struct Checker {
    mode: CheckMode,
    checks: BTreeMap<String, CheckSummary>,
    first: Option<Witness>,
}

impl Checker {
    fn record(&mut self, step: usize, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let c = self.checks.entry(name.to_string()).or_default();
        c.evaluated += 1;
        if !ok {
            c.violations += 1;
            if self.first.is_none() {
                self.first = Some(Witness {
                    step,
                    check: name.to_string(),
                    detail: detail(),
                });
            }
        }
    }
}

/// Replay `events` through a pipeline on `n` nodes. Stops at the first
/// invariant violation. Errors only on invalid input.
pub fn run(cfg: &PipelineConfig, n: usize, events: &[UpdateEvent], opts: RunOptions) -> dynmatch::Result<RunOutcome> {
    let mut p = Pipeline::new(n, *cfg)?;
    let mut oracle = (opts.oracle_every > 0).then(|| IncrementalOracle::new(n));
    let mut ck = Checker {
        mode: opts.checks,
        checks: BTreeMap::new(),
        first: None,
    };
    let factor = cfg.approx_factor();
    let mut records = Vec::with_capacity(events.len());
    for (i, ev) in events.iter().enumerate() {
        let step = i + 1;
        let (_, st) = p.update(ev)?;
        let mut rec = MetricsRecord::new(step, ev, &p, &st);
        if let Some(o) = &mut oracle {
            o.apply(ev)?;
            if step % opts.oracle_every == 0 || opts.checks == CheckMode::Full {
                let mu = o.mu();
                rec.mu = Some(mu);
                rec.ratio = (rec.output_size > 0).then(|| mu as f64 / rec.output_size as f64);
                if ck.mode != CheckMode::Off {
                    let out = rec.output_size;
                    ck.record(step, "approximation", out as f64 * factor >= mu as f64 - 1e-9, || {
                        format!("output {out} times {factor:.4} is below mu {mu}")
                    });
                }
            }
        }
        let structural = match ck.mode {
            CheckMode::Off => false,
            CheckMode::Full => true,
            CheckMode::Sampled => opts.oracle_every > 0 && step % opts.oracle_every == 0,
        };
        if ck.mode != CheckMode::Off {
            let kc = st.kernel_changes;
            ck.record(step, "kernel_changes", kc <= 3 * st.sparse_events.max(1), || {
                format!("{kc} kernel changes for {} host events", st.sparse_events)
            });
            let bound = cfg.matcher_recourse();
            let worst = st.max_matcher_changes;
            ck.record(step, "matcher_recourse", worst <= bound, || format!("{worst} > {bound}"));
            let bound = cfg.ak_change_bound(st.sparse_events);
            let akc = st.ak_changes;
            ck.record(step, "ak_changes", akc <= bound, || format!("{akc} > {bound}"));
        }
        if structural {
            let g = p.graph();
            ck.record(
                step,
                "output_valid",
                p.output_matching().is_valid_in(|a, b| g.has_edge(a, b)),
                || "output is not a matching of the graph".into(),
            );
            let k = p.kernel();
            let rep = check_kernel(p.host(), &k.edge_set(), k.params());
            ck.record(step, "kernel", rep.passed(), || format!("{:?}", rep.violations.first()));
            let deg = p.ak_max_degree();
            let bound = cfg.ak_degree_bound(p.d());
            ck.record(step, "ak_degree", deg <= bound, || format!("AK degree {deg} > {bound}"));
            if let Some(sv) = p.sparsifier() {
                let cap = sv.capacity();
                let dmax = sv.sparse().max_degree();
                ck.record(step, "sparse_degree", dmax <= cap, || format!("{dmax} > {cap}"));
            }
        }
        records.push(rec);
        if ck.first.is_some() {
            break;
        }
    }
    let mut metrics: BTreeMap<String, Stat> = BTreeMap::new();
    for r in &records {
        for (name, x) in r.numeric() {
            if x.is_nan() {
                continue;
            }
            let s = metrics.entry(name.to_string()).or_default();
            s.max = if s.samples == 0 { x } else { s.max.max(x) };
            s.mean += x;
            s.samples += 1;
        }
    }
    for s in metrics.values_mut() {
        s.mean /= s.samples as f64;
    }
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        variant: cfg.variant.to_string(),
        config: cfg.to_string(),
        nodes: n,
        updates: records.len(),
        final_m: p.graph().m(),
        output_size: p.output_matching().len(),
        final_mu: oracle.as_ref().map(|o| o.mu()),
        d: p.d(),
        m_hat: p.m_hat(),
        rescales: p.rescales(),
        approx_factor: factor,
        metrics,
        passed: ck.first.is_none(),
        checks: ck.checks,
        check_mode: opts.checks,
        oracle_every: opts.oracle_every,
        first_violation: ck.first,
    };
    Ok(RunOutcome { records, summary })
}

/// Metrics as CSV text with the fixed column order.
pub fn to_csv(records: &[MetricsRecord]) -> anyhow::Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dynmatch::pipeline::PipelineVariant;

    #[test]
    fn empty_stream() {
        let cfg = PipelineConfig::desk(PipelineVariant::TwoPlusEps);
        let out = run(&cfg, 4, &[], RunOptions::default()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.summary.updates, 0);
        assert!(out.summary.passed);
        assert_eq!(to_csv(&out.records).unwrap().lines().count(), 1);
    }

    #[test]
    fn single_edge() {
        let cfg = PipelineConfig::desk(PipelineVariant::TwoPlusEps);
        let out = run(&cfg, 2, &[UpdateEvent::insert(0, 1)], RunOptions::default()).unwrap();
        assert_eq!(out.summary.output_size, 1);
        let csv = to_csv(&out.records).unwrap();
        let header: Vec<_> = csv.lines().next().unwrap().split(',').collect();
        assert_eq!(header, CSV_COLUMNS);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), CSV_COLUMNS.len());
    }

    #[test]
    fn invalid_event_is_an_input_error() {
        let cfg = PipelineConfig::desk(PipelineVariant::TwoPlusEps);
        assert!(run(&cfg, 2, &[UpdateEvent::delete(0, 1)], RunOptions::default()).is_err());
    }
}
