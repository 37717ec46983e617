//! Experiment configs, drivers, record files and summaries.
//!
//! `run_experiment` is the single entry point: it validates a config, runs
//! the experiment with parameter points in parallel, sorts the rows by
//! parameter tuple, checks the config's gates and writes CSV and JSON Lines.

pub mod config;
pub mod experiments;
pub mod fit;
pub mod records;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind, Gates, GraphonSpec, InitialSpec, Regime, SCHEMA_VERSION};
pub use experiments::{evaluate_gates, run_experiment, GateResult, RunOutcome};
pub use fit::{fit_line, fit_log_log, LineFit};
pub use records::{read_records, sort_records, write_records, ExperimentRecord};
pub use report::{format_gates, summarize};
