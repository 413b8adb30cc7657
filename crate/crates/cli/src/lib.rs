//! Batch experiment runner for the controlled-SWAP weak value toolkit:
//! parses JSON configs describing states, observables, and a circuit
//! variant, executes exact analytics and/or Monte Carlo estimation, and
//! emits machine-readable reports and plot-ready tables.

pub mod config;
pub mod error;
pub mod report;
pub mod runner;

pub use config::{ExperimentConfig, ObservableSpec, OutputFormat, StateSpec, Variant};
pub use error::CliError;
pub use report::{RunReport, SweepRow};
