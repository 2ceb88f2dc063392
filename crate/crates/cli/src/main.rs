//! `spmid`: synthesize ground-truth data, identify parameters on every
//! protocol combination, cross-validate, and rank the combinations.

mod commands;
mod config;
mod exit;
mod layout;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use log::error;

use crate::config::{parse_id_list, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "spmid", version, about = "Single particle model identification campaigns")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Case ids, e.g. `21,29,31` or `1-7`.
    #[arg(long, global = true, value_parser = parse_ids)]
    cases: Option<IdList>,
    /// Scenario ids, same syntax as `--cases`.
    #[arg(long, global = true, value_parser = parse_ids)]
    scenarios: Option<IdList>,
    /// Swarm seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone)]
struct IdList(Vec<usize>);

fn parse_ids(s: &str) -> Result<IdList, String> {
    parse_id_list(s).map(IdList)
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the base protocols and write the scenario datasets.
    Synth,
    /// Identify parameters for each case.
    Estimate,
    /// Validate every case on every scenario.
    Validate,
    /// Cost table, optimal datasets and level reports.
    Analyze {
        /// Use a `case,e_y_v,e_theta,t_total_h` CSV instead of run outputs.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Print a summary of the run.
    Report,
}

fn run(cli: Cli) -> Result<()> {
    let c = cli.common;
    let overrides = Overrides {
        cases: c.cases.map(|l| l.0),
        scenarios: c.scenarios.map(|l| l.0),
        seed: c.seed,
        workers: c.workers,
        out_dir: c.out,
    };
    let cfg = ExperimentConfig::load(c.config.as_deref(), overrides)?;
    match cli.command {
        Command::Synth => {
            let m = commands::synth::run(&cfg)?;
            println!(
                "wrote {} base and {} scenario datasets to {}",
                m.base.len(),
                m.scenarios.len(),
                cfg.out_dir.display()
            );
        }
        Command::Estimate => {
            for e in commands::estimate::run(&cfg)? {
                println!(
                    "case {:>2}: training RMSE {:.4} V, {:.1} s",
                    e.case_id, e.training_rmse, e.result.t_opt_s
                );
            }
        }
        Command::Validate => {
            let m = commands::validate::run(&cfg)?;
            println!(
                "RMSE matrix {}x{} written ({} flagged)",
                m.n_rows(),
                m.n_cols(),
                m.flagged().len()
            );
        }
        Command::Analyze { metrics } => {
            let a = commands::analyze::run(&cfg, metrics.as_deref())?;
            println!("cost table over {} cases", a.table.rows.len());
            for o in &a.optima {
                println!("{}: case {} (J = {:.3})", o.option, o.case_id, o.j);
            }
        }
        Command::Report => print!("{}", commands::report::run(&cfg)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(exit::exit_code(&e))
        }
    }
}
