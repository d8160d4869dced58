//! Batch front end for the quantum thermal transistor simulator: scenario
//! catalog, sweep configuration, parallel runner and CSV/manifest output.

pub mod check;
pub mod config;
pub mod output;
pub mod runner;
pub mod scenario;

pub use config::{resolve, ConfigError, ConfigFile, Overrides, StateSelection, SweepConfig};
pub use output::{write_csv, write_outputs, OutputError};
pub use runner::{run, Records, RunError, RunResult, SweepRecord, TimePoint};
pub use scenario::{list_scenarios, OutputKind, Scenario, CATALOG};
