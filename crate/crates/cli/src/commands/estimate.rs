//! Swarm identification, one case per configured scenario id.

use anyhow::{Context, Result};
use log::info;
use rayon::prelude::*;
use spmid_core::{estimate, scenario, TimeSeries};

use super::with_workers;
use crate::config::ExperimentConfig;
use crate::layout::{require, write_json, CaseEstimate, Layout};

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<CaseEstimate>> {
    let layout = Layout::new(&cfg.out_dir);
    let ctx = cfg.sim_context()?;
    let space = cfg.search_space();

    let datasets = cfg
        .cases
        .iter()
        .map(|&id| {
            let path = layout.scenario_series(id);
            require(&path, "run `spmid synth` with this scenario first")?;
            let ts = TimeSeries::load(&path).with_context(|| format!("loading {}", path.display()))?;
            Ok((id, ts))
        })
        .collect::<Result<Vec<_>>>()?;

    let results = with_workers(cfg, || {
        datasets
            .par_iter()
            .map(|(id, dataset)| -> Result<CaseEstimate> {
                info!("case {id}: estimating on {} samples", dataset.len());
                let result =
                    estimate(dataset, &space, &cfg.swarm, &ctx).with_context(|| format!("estimating case {id}"))?;
                let est = CaseEstimate {
                    case_id: *id,
                    members: scenario::scenario(*id)?.members,
                    dataset_duration_h: dataset.duration_h(),
                    swarm: cfg.swarm,
                    search_space: space,
                    training_rmse: result.training_rmse(),
                    result,
                };
                info!(
                    "case {id}: training RMSE {:.4} V in {:.1} s",
                    est.training_rmse, est.result.t_opt_s
                );
                write_json(&layout.estimate(*id), &est)?;
                Ok(est)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(results)
}
