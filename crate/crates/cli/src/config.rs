//! Campaign configuration: one JSON file, every field optional.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use spmid_core::{
    CyclerLimits, GroupedParameters, OcpCurve, OcpPair, PhysicalConstants, ProfileSpec, SearchSpace, SimContext,
    SolverConfig, SwarmConfig, N_SCENARIOS,
};

use crate::exit::ConfigError;

/// Half-cell OCP tables; `None` selects the bundled default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OcpFiles {
    pub negative: Option<PathBuf>,
    pub positive: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ground_truth: GroupedParameters,
    pub constants: PhysicalConstants,
    pub ocp: OcpFiles,
    pub limits: CyclerLimits,
    pub solver: SolverConfig,
    pub protocols: Vec<ProfileSpec>,
    pub swarm: SwarmConfig,
    /// Defaults to the ground truth scaled by [0.2, 5].
    pub search_space: Option<SearchSpace>,
    pub cases: Vec<usize>,
    pub scenarios: Vec<usize>,
    /// Overrides `swarm.rng_seed` when present.
    pub seed: Option<u64>,
    /// Worker threads; all cores when absent.
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let all: Vec<usize> = (1..=N_SCENARIOS).collect();
        ExperimentConfig {
            ground_truth: GroupedParameters::REFERENCE,
            constants: PhysicalConstants::default(),
            ocp: OcpFiles::default(),
            limits: CyclerLimits::default(),
            solver: SolverConfig::default(),
            protocols: ProfileSpec::default_set(),
            swarm: SwarmConfig::default(),
            search_space: None,
            cases: all.clone(),
            scenarios: all,
            seed: None,
            workers: None,
            out_dir: PathBuf::from("runs/default"),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub cases: Option<Vec<usize>>,
    pub scenarios: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Reads `path` (or the defaults when `None`), applies `overrides`, and
    /// resolves relative OCP paths against the config file's directory.
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self> {
        let mut cfg = match path {
            None => ExperimentConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read config {}: {e}", p.display())))?;
                let mut cfg: ExperimentConfig = serde_json::from_str(&text)
                    .map_err(|e| ConfigError(format!("invalid config {}: {e}", p.display())))?;
                let base = p.parent().unwrap_or(Path::new("."));
                for f in [&mut cfg.ocp.negative, &mut cfg.ocp.positive].into_iter().flatten() {
                    if f.is_relative() {
                        *f = base.join(&*f);
                    }
                }
                cfg
            }
        };
        if let Some(v) = overrides.cases {
            cfg.cases = v;
        }
        if let Some(v) = overrides.scenarios {
            cfg.scenarios = v;
        }
        if let Some(v) = overrides.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = overrides.workers {
            cfg.workers = Some(v);
        }
        if let Some(v) = overrides.out_dir {
            cfg.out_dir = v;
        }
        if let Some(seed) = cfg.seed {
            cfg.swarm.rng_seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |r: spmid_core::Result<()>| r.map_err(|e| ConfigError(e.to_string()));
        check(self.ground_truth.validate())?;
        check(self.constants.validate())?;
        check(self.limits.validate())?;
        check(self.solver.validate())?;
        check(self.swarm.validate())?;
        check(self.search_space().validate())?;
        for spec in &self.protocols {
            check(spec.validate())?;
        }
        let mut designations: Vec<_> = self.protocols.iter().map(|p| p.designation).collect();
        designations.sort();
        designations.dedup();
        if designations.len() != self.protocols.len() {
            bail!(ConfigError("each protocol designation may appear only once".into()));
        }
        for (what, ids) in [("case", &self.cases), ("scenario", &self.scenarios)] {
            if ids.is_empty() {
                bail!(ConfigError(format!("{what} list is empty")));
            }
            if let Some(bad) = ids.iter().find(|&&i| !(1..=N_SCENARIOS).contains(&i)) {
                bail!(ConfigError(format!("{what} id {bad} outside 1..={N_SCENARIOS}")));
            }
        }
        if self.workers == Some(0) {
            bail!(ConfigError("workers must be at least 1".into()));
        }
        for f in [&self.ocp.negative, &self.ocp.positive].into_iter().flatten() {
            if !f.is_file() {
                bail!(ConfigError(format!("OCP file {} does not exist", f.display())));
            }
        }
        Ok(())
    }

    pub fn search_space(&self) -> SearchSpace {
        self.search_space
            .unwrap_or_else(|| SearchSpace::scaled_around(&self.ground_truth, 0.2, 5.0))
    }

    pub fn ocp_pair(&self) -> Result<OcpPair> {
        let load = |p: &Option<PathBuf>, default: fn() -> OcpCurve| -> Result<OcpCurve> {
            match p {
                None => Ok(default()),
                Some(p) => OcpCurve::load(p)
                    .with_context(|| format!("loading OCP table {}", p.display()))
                    .map_err(|e| ConfigError(format!("{e:#}")).into()),
            }
        };
        Ok(OcpPair::new(
            load(&self.ocp.negative, OcpCurve::default_graphite)?,
            load(&self.ocp.positive, OcpCurve::default_nmc)?,
        ))
    }

    pub fn sim_context(&self) -> Result<SimContext> {
        Ok(SimContext {
            consts: self.constants,
            solver: self.solver,
            ocp: self.ocp_pair()?,
        })
    }
}

/// Parses `1,3,5-7` into `[1, 3, 5, 6, 7]`.
pub fn parse_id_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not an id"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err("empty id list".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_lists() {
        assert_eq!(parse_id_list("21,29,31").unwrap(), vec![21, 29, 31]);
        assert_eq!(parse_id_list("3-5, 1").unwrap(), vec![1, 3, 4, 5]);
        assert!(parse_id_list("5-3").is_err());
        assert!(parse_id_list("a").is_err());
        assert!(parse_id_list("").is_err());
    }

    #[test]
    fn empty_json_gives_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn overrides_win() {
        let cfg = ExperimentConfig::load(
            None,
            Overrides {
                cases: Some(vec![29]),
                seed: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.cases, vec![29]);
        assert_eq!(cfg.swarm.rng_seed, 7);
    }

    #[test]
    fn out_of_range_ids_are_config_errors() {
        let err = ExperimentConfig::load(
            None,
            Overrides {
                scenarios: Some(vec![32]),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
