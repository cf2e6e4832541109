//! Batch runner: scenario files in, curves as CSV or JSON out.

pub mod config;
pub mod output;
pub mod run;
pub mod units;

pub use config::{parse_config, parse_json, parse_toml, ConfigError, Format, Mode, ScenarioConfig, ValidationError};
pub use run::{run_scenario, RunError};
