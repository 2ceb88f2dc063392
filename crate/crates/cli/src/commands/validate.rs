//! Cross-validation of every estimated case on every configured scenario.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use log::{info, warn};
use spmid_core::evaluation::{cross_validate, param_errors, CaseRecord, RmseMatrix};
use spmid_core::{BaseSeries, TimeSeries};

use super::{selected_scenarios, with_workers};
use crate::config::ExperimentConfig;
use crate::layout::{read_json, require, write_json, write_text, CaseEstimate, CaseSummary, Layout};

pub fn run(cfg: &ExperimentConfig) -> Result<RmseMatrix> {
    let layout = Layout::new(&cfg.out_dir);
    let ctx = cfg.sim_context()?;
    let scenarios = selected_scenarios(cfg)?;

    let mut needed: Vec<_> = scenarios.iter().flat_map(|s| s.members.iter().copied()).collect();
    needed.sort();
    needed.dedup();
    let mut base = BTreeMap::new();
    for d in needed {
        let path = layout.base_series(d);
        require(&path, "run `spmid synth` first")?;
        base.insert(d, TimeSeries::load(&path).with_context(|| format!("loading {}", path.display()))?);
    }
    let base = BaseSeries::from_map(base);

    let estimates = cfg
        .cases
        .iter()
        .map(|&id| read_json::<CaseEstimate>(&layout.estimate(id), "run `spmid estimate` for this case first"))
        .collect::<Result<Vec<_>>>()?;
    let cases: Vec<_> = estimates.iter().map(|e| (e.case_id, e.result.theta_star)).collect();

    info!("validating {} cases on {} scenarios", cases.len(), scenarios.len());
    let matrix = with_workers(cfg, || cross_validate(&cases, &base, &scenarios, &ctx))?;
    for (c, s) in matrix.flagged() {
        warn!("case {c} on scenario {s}: simulation infeasible, entry flagged");
    }
    write_text(&layout.rmse_matrix(), &matrix.to_csv_string())?;

    let summaries = estimates
        .iter()
        .map(|e| {
            Ok(CaseSummary {
                record: CaseRecord::new(
                    e.case_id,
                    e.result.theta_star,
                    e.result.t_opt_s / 3600.0,
                    e.dataset_duration_h,
                    e.training_rmse,
                ),
                members: e.members.clone(),
                errors: param_errors(&e.result.theta_star, &cfg.ground_truth)?,
                scenario1_rmse: matrix.get(e.case_id, 1),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(&layout.cases(), &summaries)?;
    Ok(matrix)
}
