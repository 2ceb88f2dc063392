//! Ground-truth data: the base protocols and their scenario combinations.

use anyhow::{Context, Result};
use log::{info, warn};
use spmid_core::protocols::equivalent_c_rate;
use spmid_core::{BaseSeries, TimeSeries};

use super::{selected_scenarios, with_workers};
use crate::config::ExperimentConfig;
use crate::exit::ConfigError;
use crate::layout::{sha256_hex, write_json, BaseEntry, DatasetEntry, Layout, Manifest, ScenarioEntry};

pub fn run(cfg: &ExperimentConfig) -> Result<Manifest> {
    let layout = Layout::new(&cfg.out_dir);
    let ctx = cfg.sim_context()?;
    write_json(&layout.resolved_config(), cfg)?;

    info!("simulating {} base protocols", cfg.protocols.len());
    let base = with_workers(cfg, || {
        BaseSeries::synthesize(&cfg.protocols, &cfg.ground_truth, &ctx.consts, &ctx.solver, &cfg.limits, &ctx.ocp)
    })?
    .context("simulating base protocols")?;

    let cap = cfg.limits.nominal_capacity_ah;
    let mut manifest = Manifest {
        base: Vec::new(),
        scenarios: Vec::new(),
    };
    for (d, series) in base.iter() {
        for w in &series.warnings {
            warn!("{d}: {w}");
        }
        let path = layout.base_series(d);
        let dataset = store(&layout, &path, series, cap)?;
        info!(
            "{d}: {:.2} h, C/{:.2}, {} samples",
            dataset.duration_h,
            1.0 / dataset.equivalent_c_rate,
            dataset.samples
        );
        manifest.base.push(BaseEntry {
            designation: d,
            dataset,
            warnings: series.warnings.clone(),
        });
    }

    for s in selected_scenarios(cfg)? {
        if let Some(d) = s.members.iter().find(|d| base.get(**d).is_none()) {
            return Err(ConfigError(format!("scenario {} needs protocol {d}, which is not configured", s.id)).into());
        }
        let series = base
            .build_dataset(&s)
            .with_context(|| format!("assembling scenario {}", s.id))?;
        let dataset = store(&layout, &layout.scenario_series(s.id), &series, cap)?;
        manifest.scenarios.push(ScenarioEntry {
            id: s.id,
            members: s.members.clone(),
            reference_duration_h: s.duration_h,
            dataset,
        });
    }
    info!("wrote {} scenario datasets", manifest.scenarios.len());
    write_json(&layout.manifest(), &manifest)?;
    Ok(manifest)
}

fn store(layout: &Layout, path: &std::path::Path, series: &TimeSeries, cap: f64) -> Result<DatasetEntry> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    series.save(path)?;
    let csv = series.to_csv_string();
    let rel = path.strip_prefix(layout.root()).unwrap_or(path);
    Ok(DatasetEntry {
        file: rel.to_string_lossy().replace('\\', "/"),
        samples: series.len(),
        duration_h: series.duration_h(),
        equivalent_c_rate: if series.is_empty() { 0.0 } else { equivalent_c_rate(series, cap)? },
        sha256: sha256_hex(csv.as_bytes()),
    })
}
