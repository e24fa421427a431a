//! Run orchestration: one run per `(config, seed)`, many seeds in parallel.

use rayon::prelude::*;

use crate::engine::RandomStreams;
use crate::sim::{LogSink, NullSink, Simulation};

use super::config::{ConfigError, ScenarioConfig};
use super::metrics::RunMetrics;
use super::output::RunRow;
use super::topology::generate_topology;

/// Run one scenario instance. A pure function of `(cfg, seed)`; `cfg.seed`
/// is ignored in favour of `seed`.
pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<RunMetrics, ConfigError> {
    run_scenario_with_sink(cfg, seed, NullSink).map(|(m, _)| m)
}

pub fn run_scenario_with_sink<S: LogSink>(
    cfg: &ScenarioConfig,
    seed: u64,
    sink: S,
) -> Result<(RunMetrics, S), ConfigError> {
    cfg.validate()?;
    let topo = generate_topology(cfg, &mut RandomStreams::new(seed));
    Ok(Simulation::new(cfg, topo, sink).run(seed))
}

/// The seeds of a config point: `cfg.seed, cfg.seed + 1, ...`.
pub fn seeds(cfg: &ScenarioConfig) -> Vec<u64> {
    (0..cfg.repetitions as u64)
        .map(|i| cfg.seed.wrapping_add(i))
        .collect()
}

/// Run every seed of `cfg` (in parallel) and return one row per seed, in
/// seed order.
pub fn run_point(cfg: &ScenarioConfig) -> Result<Vec<(RunRow, RunMetrics)>, ConfigError> {
    cfg.validate()?;
    let results: Vec<_> = seeds(cfg)
        .into_par_iter()
        .map(|seed| {
            let m = run_scenario(cfg, seed).expect("validated above");
            (RunRow::new(cfg, seed, &m), m)
        })
        .collect();
    Ok(results)
}
