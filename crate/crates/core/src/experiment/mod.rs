//! Experiment configuration, initial conditions, persistence and the
//! `run`, `compare`, `verify` and `restart-study` drivers.

mod config;
mod drivers;
mod initial;
mod output;
mod snapshot;
mod verify;

pub use config::{parse_config, ExperimentConfig, IcKind, InitialCondition, OutputConfig};
pub use drivers::{cmd_compare, cmd_restart_study, cmd_run, CompareReport, CompareRow, RunReport, StudyReport, StudyRow};
pub use initial::{abc, initial_velocity, make_initial, random_band, taylor_green};
pub use output::{read_timeseries, timeseries_csv, write_timeseries};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, MAGIC, VERSION};
pub use verify::{cauchy_algebra_residuals, cmd_verify, Check, Suite};
