//! Experiment runner for the non-Hermitian kicked rotor: configuration,
//! scenario execution, CSV/JSON output and comparison against closed forms.

pub mod config;
pub mod error;
pub mod output;
pub mod report;
pub mod scenario;
pub mod selftest;

pub use config::{ExperimentConfig, Overrides, Scenario, TimeSamples};
pub use error::{CliError, Result};
pub use output::{emit_results, read_results, write_rows, Format, CSV_HEADER};
pub use report::{compare_report, Check, Report, Status};
pub use scenario::{run_point, run_scenario, ResultRow, RunInfo};
pub use selftest::{run_selftest, SelftestSummary};
