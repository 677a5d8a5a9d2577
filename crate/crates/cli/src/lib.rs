//! Workload generation and stream replay for the dynamic matching
//! pipelines.

pub mod run;
pub mod workload;

pub use run::{run, to_csv, CheckMode, MetricsRecord, RunOptions, RunOutcome, Summary};
pub use workload::{generate, WorkloadKind, WorkloadSpec};
