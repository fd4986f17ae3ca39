//! Command-line front end and benchmark harness over `quasar-core`.
//!
//! Subcommands: `bench` (optimizer runs and CSV output), `check` (sampled
//! geometry constants), `ode` (continuous-time flow) and `dump` (grid values).

pub mod bench;
pub mod check;
pub mod config;
pub mod dump;
pub mod error;
pub mod ode;
pub mod registry;

pub use bench::{run_experiment, ExperimentConfig, ExperimentSummary, LMode, RunOutcome};
pub use config::Settings;
pub use error::{CliError, Result};
pub use registry::{build, BuiltFunction, FunctionId, FunctionSpec};
