//! Monte Carlo experiments: per-trial metric records, correlation tables,
//! scatter export, shrinkage tuning, the fixed-target sample-support check
//! and randomized verification of the closed forms.

mod experiment;
mod output;
mod rmb;
mod stats;
mod table;
mod tune;
mod verify;

pub use experiment::{check_bound, run_trials, ScenarioSpec, TrialRecord, TrialRun, MAX_REDRAWS};
pub use output::{parse_scatter_csv, scatter_csv, write_file, RunHeader, SCATTER_COLUMNS};
pub use rmb::{rmb_experiment, RmbResult, RmbSpec};
pub use stats::{mean, pearson};
pub use table::{correlation_table, CorrelationTable, TableColumn};
pub use tune::{lambda_grid, tune_lambda, TuneResult, TuneRow, TuneSpec};
pub use verify::{verify, VerifyConfig, VerifyReport};
