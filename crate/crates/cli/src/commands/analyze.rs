//! Cost table, optimal datasets and level reports.

use std::path::Path;

use anyhow::{bail, Result};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use spmid_core::evaluation::{
    cost_table, level_reports, load_metrics, select_optimal, CaseMetrics, CostOption, CostTable, CostWeights,
    RmseMatrix, Selection,
};
use spmid_core::scenario::{self, reference_durations};
use spmid_core::{enumerate_scenarios, Designation};

use crate::config::ExperimentConfig;
use crate::exit::MissingInput;
use crate::layout::{read_json, write_json, write_text, CaseSummary, Layout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub option: CostOption,
    pub weights: CostWeights,
    pub case_id: usize,
    pub members: Vec<Designation>,
    pub j: f64,
    pub tied_with: Vec<usize>,
}

impl From<Selection> for Optimum {
    fn from(s: Selection) -> Self {
        Optimum {
            option: s.option,
            weights: s.weights,
            case_id: s.case_id,
            members: scenario::scenario(s.case_id).map(|s| s.members).unwrap_or_default(),
            j: s.j,
            tied_with: s.tied_with,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub table: CostTable,
    pub optima: Vec<Optimum>,
}

/// Builds the three criteria per case from `validate` outputs.
pub fn metrics_from_run(layout: &Layout) -> Result<Vec<CaseMetrics>> {
    let summaries: Vec<CaseSummary> = read_json(&layout.cases(), "run `spmid validate` first")?;
    let mut metrics = Vec::new();
    for s in &summaries {
        match s.scenario1_rmse {
            Some(e_y) => metrics.push(CaseMetrics {
                case_id: s.record.case_id,
                e_y,
                e_theta: s.errors.delta_dist,
                t_total_h: s.record.t_total_h,
            }),
            None => warn!(
                "case {}: no feasible scenario-1 RMSE, left out of the cost table",
                s.record.case_id
            ),
        }
    }
    if metrics.is_empty() {
        bail!(MissingInput(
            "no case has a scenario-1 validation RMSE; include scenario 1 in `validate`".into()
        ));
    }
    Ok(metrics)
}

pub fn run(cfg: &ExperimentConfig, metrics_csv: Option<&Path>) -> Result<Analysis> {
    let layout = Layout::new(&cfg.out_dir);
    let metrics = match metrics_csv {
        Some(p) => {
            crate::layout::require(p, "pass an existing metrics CSV")?;
            load_metrics(p)?
        }
        None => metrics_from_run(&layout)?,
    };
    info!("analyzing {} cases", metrics.len());

    let table = cost_table(&metrics)?;
    let optima: Vec<Optimum> = CostOption::ALL
        .into_iter()
        .map(|o| select_optimal(&table, o).map(Optimum::from))
        .collect::<spmid_core::Result<_>>()?;
    for o in &optima {
        if !o.tied_with.is_empty() {
            warn!("{}: tie with cases {:?}, lowest id {} kept", o.option, o.tied_with, o.case_id);
        }
    }
    write_text(&layout.cost_table(), &table.to_csv_string())?;
    write_json(&layout.optima(), &optima)?;

    if layout.rmse_matrix().exists() {
        let matrix = RmseMatrix::load(layout.rmse_matrix())?;
        let all = enumerate_scenarios(&reference_durations())?;
        let mut report = level_reports(&matrix, &all);
        if let Ok(summaries) = read_json::<Vec<CaseSummary>>(&layout.cases(), "") {
            let errors = summaries.iter().map(|s| (s.record.case_id, s.errors.clone())).collect();
            report = report.with_parameter_level(errors, &metrics);
        }
        let selections = optima
            .iter()
            .map(|o| Selection {
                option: o.option,
                weights: o.weights,
                case_id: o.case_id,
                j: o.j,
                tied_with: o.tied_with.clone(),
            })
            .collect();
        write_json(&layout.levels(), &report.with_optima(selections))?;
    } else {
        info!("no RMSE matrix in {}; levels.json not written", layout.root().display());
    }
    Ok(Analysis { table, optima })
}
