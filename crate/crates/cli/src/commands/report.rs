//! Plain-text summary of a finished campaign.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use spmid_core::evaluation::{cost_table, select_optimal, CostOption, RmseMatrix};
use spmid_core::{scenario, Designation, PARAM_NAMES};

use super::analyze::metrics_from_run;
use crate::config::ExperimentConfig;
use crate::layout::{read_json, require, write_text, CaseSummary, Layout};

fn members_label(members: &[Designation]) -> String {
    let names: Vec<_> = members.iter().map(|d| d.as_str()).collect();
    format!("{{{}}}", names.join(","))
}

pub fn run(cfg: &ExperimentConfig) -> Result<String> {
    let layout = Layout::new(&cfg.out_dir);
    require(&layout.rmse_matrix(), "run `spmid validate` first")?;
    let matrix = RmseMatrix::load(layout.rmse_matrix())?;
    if matrix.is_empty() {
        bail!("RMSE matrix {} is empty; nothing to report", layout.rmse_matrix().display());
    }
    let summaries: Vec<CaseSummary> = read_json(&layout.cases(), "run `spmid validate` first")?;
    let text = render(&matrix, &summaries, &layout)?;
    write_text(&layout.report(), &text)?;
    Ok(text)
}

fn render(matrix: &RmseMatrix, summaries: &[CaseSummary], layout: &Layout) -> Result<String> {
    let mut out = String::new();

    writeln!(out, "Estimation and scenario-1 validation")?;
    writeln!(
        out,
        "{:>4}  {:<22} {:>10} {:>10} {:>8} {:>8} {:>8}",
        "case", "dataset", "train [V]", "scen1 [V]", "opt [h]", "exp [h]", "tot [h]"
    )?;
    for s in summaries {
        let r = &s.record;
        let s1 = s
            .scenario1_rmse
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:>4}  {:<22} {:>10.4} {:>10} {:>8.2} {:>8.1} {:>8.1}",
            r.case_id,
            members_label(&s.members),
            r.training_rmse,
            s1,
            r.t_opt_h,
            r.t_exp_h,
            r.t_total_h
        )?;
    }

    writeln!(out, "\nRelative parameter errors [%]")?;
    write!(out, "{:>4}", "case")?;
    for name in PARAM_NAMES {
        write!(out, " {name:>9}")?;
    }
    writeln!(out, " {:>9} {:>12}", "mean", "distance")?;
    for s in summaries {
        write!(out, "{:>4}", s.record.case_id)?;
        for d in s.errors.delta_theta {
            write!(out, " {d:>9.2}")?;
        }
        writeln!(out, " {:>9.2} {:>12.2}", s.errors.mean_delta, s.errors.delta_dist)?;
    }

    writeln!(
        out,
        "\nRMSE matrix: {} cases x {} scenarios, {} flagged",
        matrix.n_rows(),
        matrix.n_cols(),
        matrix.flagged().len()
    )?;
    for (r, row) in matrix.values.iter().enumerate() {
        write!(out, "{:>4}", matrix.case_ids[r])?;
        for v in row {
            match v {
                Some(x) => write!(out, " {x:.4}")?,
                None => write!(out, " {:>6}", "NA")?,
            }
        }
        writeln!(out)?;
    }

    match metrics_from_run(layout).and_then(|m| Ok(cost_table(&m)?)) {
        Ok(table) => {
            writeln!(out, "\nCost table")?;
            out.push_str(&table.to_csv_string().replace(',', "\t"));
            writeln!(out, "\nOptimal datasets")?;
            for o in CostOption::ALL {
                let s = select_optimal(&table, o)?;
                let members = scenario::scenario(s.case_id)?.members;
                let ties = if s.tied_with.is_empty() {
                    String::new()
                } else {
                    format!(" (tied with {:?})", s.tied_with)
                };
                writeln!(out, "{o}  case {:>2}  {:<22} J = {:.3}{ties}", s.case_id, members_label(&members), s.j)?;
            }
        }
        Err(e) => writeln!(out, "\nCost table unavailable: {e:#}")?,
    }
    Ok(out)
}
