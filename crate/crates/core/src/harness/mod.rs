//! Experiment front end: configuration, topology, orchestration, metrics,
//! confidence intervals and CSV output.

pub mod config;
pub mod metrics;
pub mod output;
pub mod runner;
pub mod stats;
pub mod topology;

pub use config::{parse_config, parse_config_str, ConfigError, ScenarioConfig};
pub use metrics::{mac_throughput, RunMetrics};
pub use output::{emit_csv, scenario_id, summarize, RunRow, SummaryRow};
pub use runner::{run_point, run_scenario, run_scenario_with_sink, seeds};
pub use stats::{aggregate_ci95, Ci95};
pub use topology::{generate_topology, AP_POSITION};
