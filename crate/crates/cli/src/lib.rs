//! Configuration loading and experiment drivers behind the `satroute` binary.

pub mod config;
pub mod experiments;

pub use config::{load_config, ConfigError, ExperimentConfig, Method};
pub use experiments::{
    cmd_analyze, cmd_compare, cmd_optimize, cmd_simulate, cmd_sweep, cmd_table2, fmt_num, CliError, CliResult,
};
