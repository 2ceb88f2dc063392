pub mod analyze;
pub mod estimate;
pub mod report;
pub mod synth;
pub mod validate;

use anyhow::Result;
use spmid_core::{enumerate_scenarios, scenario::reference_durations, Scenario};

use crate::config::ExperimentConfig;

/// The configured scenario subset with reference durations.
pub fn selected_scenarios(cfg: &ExperimentConfig) -> Result<Vec<Scenario>> {
    Ok(enumerate_scenarios(&reference_durations())?
        .into_iter()
        .filter(|s| cfg.scenarios.contains(&s.id))
        .collect())
}

/// Runs `f` on a pool limited to the configured worker count.
pub fn with_workers<T: Send>(cfg: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?.install(f))
}
