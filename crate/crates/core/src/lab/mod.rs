//! Configuration, scenario orchestration, artifact files and cross-run
//! comparison behind the command-line tool.

pub mod compare;
pub mod config;
pub mod scenario;
pub mod summary;

pub use compare::{compare_runs, load_run, ComparisonTable};
pub use config::{parse_config, RunConfig};
pub use scenario::{check_operators, run_continuation, run_scenario, ContinuationOutcome, Scenario, FAILED_MARKER};
pub use summary::{Check, RunSummary, Status};
