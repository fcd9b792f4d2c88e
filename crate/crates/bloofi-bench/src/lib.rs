//! Benchmark harness for the filter indexes: generates filter populations
//! under the standard parameter grid, builds each index variant, runs a
//! timed query workload plus sampled maintenance operations, and emits the
//! measurements as CSV. The `bloofi-bench` binary exposes all of it on the
//! command line.

pub mod config;
pub mod csv;
pub mod population;
pub mod runner;

pub use config::{Construction, Distribution, ExperimentConfig, IndexChoice, IndexKind};
pub use csv::{emit_csv, write_csv};
pub use population::{build_queries, generate_population, halve_population, Population};
pub use runner::{run_experiment, run_loaded, run_update_phase, ExperimentRow, MetricsRecord};
