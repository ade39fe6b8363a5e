//! Config-driven experiment runner for `edgeworth-core`.

pub mod config;
pub mod convergence;
pub mod report;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Task};
pub use report::{Report, Row};
pub use run::{run, run_config, RunError, RunOptions, RunOutcome, EXIT_ASSUMPTION, EXIT_ERROR, EXIT_OK};
