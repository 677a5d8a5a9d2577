use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dynmatch::graph::{format_stream, parse_stream};
use dynmatch::pipeline::PipelineConfig;
use dynmatch::UpdateEvent;
use dynmatch_cli::workload::check_stream;
use dynmatch_cli::{generate, run, to_csv, CheckMode, RunOptions, WorkloadKind, WorkloadSpec};

const EXIT_INVARIANT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "dynmatch", version, about = "Replay update streams through dynamic matching pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a stream and write per-update metrics and a summary.
    Run(RunArgs),
    /// Write a generated stream.
    Generate(GenArgs),
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    events: usize,
    #[arg(long, default_value_t = 300)]
    nodes: usize,
    /// Live edges at steady state for sliding-window.
    #[arg(long)]
    window: Option<usize>,
    /// Gadget count for gadget-family.
    #[arg(long, default_value_t = 50)]
    gadgets: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Stream file to replay.
    #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
    stream: Option<PathBuf>,
    /// Generate the stream instead of reading one.
    #[arg(long, value_enum)]
    generate: Option<WorkloadKind>,
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Metrics CSV path; the summary goes next to it with a .json extension.
    /// Without it the summary is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    oracle_every: usize,
    #[arg(long, value_enum, default_value_t = CheckMode::Sampled)]
    check_invariants: CheckMode,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    generate: WorkloadKind,
    /// Pipeline the adversary plays against.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    workload: WorkloadArgs,
    /// Stream path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    Ok(PipelineConfig::parse(&text)?)
}

fn spec(kind: WorkloadKind, w: &WorkloadArgs) -> WorkloadSpec {
    let mut s = WorkloadSpec::new(kind, w.seed, w.nodes, w.events);
    if let Some(win) = w.window {
        s.window = win;
    }
    s.gadgets = w.gadgets;
    s
}

fn run_cmd(a: RunArgs) -> Result<ExitCode> {
    let cfg = load_config(a.config.as_deref())?;
    let (n, events): (usize, Vec<UpdateEvent>) = match (&a.stream, a.generate) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let ev = parse_stream(&text)?;
            let needed = check_stream(&ev)?;
            (needed.max(a.workload.nodes), ev)
        }
        (None, Some(kind)) => {
            let s = spec(kind, &a.workload);
            (s.node_count(), generate(&s, &cfg)?)
        }
        (None, None) => bail!("one of --stream or --generate is required"),
    };
    let opts = RunOptions {
        oracle_every: a.oracle_every,
        checks: a.check_invariants,
    };
    let outcome = run(&cfg, n, &events, opts)?;
    let json = serde_json::to_string_pretty(&outcome.summary)?;
    match &a.out {
        Some(path) => {
            fs::write(path, to_csv(&outcome.records)?).with_context(|| format!("writing {}", path.display()))?;
            fs::write(path.with_extension("json"), json + "\n")?;
        }
        None => println!("{json}"),
    }
    if let Some(w) = &outcome.summary.first_violation {
        eprintln!("invariant violation at step {}: {}: {}", w.step, w.check, w.detail);
        return Ok(ExitCode::from(EXIT_INVARIANT));
    }
    Ok(ExitCode::SUCCESS)
}

fn gen_cmd(a: GenArgs) -> Result<ExitCode> {
    let cfg = load_config(a.config.as_deref())?;
    let s = spec(a.generate, &a.workload);
    let text = format_stream(&generate(&s, &cfg)?);
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Run(a) => run_cmd(a),
        Command::Generate(a) => gen_cmd(a),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_INPUT)
    })
}
