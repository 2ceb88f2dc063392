//! Where every artifact lives under the output directory, and the JSON
//! records that pass between commands.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spmid_core::evaluation::{CaseRecord, ParamErrorReport};
use spmid_core::{Designation, EstimationResult, SearchSpace, SwarmConfig};

use crate::exit::MissingInput;

pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn base_dir(&self) -> PathBuf {
        self.root.join("data").join("base")
    }

    pub fn scenario_dir(&self) -> PathBuf {
        self.root.join("data").join("scenarios")
    }

    pub fn estimate_dir(&self) -> PathBuf {
        self.root.join("estimates")
    }

    pub fn base_series(&self, d: Designation) -> PathBuf {
        self.base_dir().join(format!("{}.csv", d.slug()))
    }

    pub fn scenario_series(&self, id: usize) -> PathBuf {
        self.scenario_dir().join(format!("scenario_{id:02}.csv"))
    }

    pub fn estimate(&self, case_id: usize) -> PathBuf {
        self.estimate_dir().join(format!("case_{case_id:02}.json"))
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn resolved_config(&self) -> PathBuf {
        self.root.join("config.resolved.json")
    }

    pub fn rmse_matrix(&self) -> PathBuf {
        self.root.join("rmse_matrix.csv")
    }

    pub fn cases(&self) -> PathBuf {
        self.root.join("cases.json")
    }

    pub fn cost_table(&self) -> PathBuf {
        self.root.join("cost_table.csv")
    }

    pub fn optima(&self) -> PathBuf {
        self.root.join("optima.json")
    }

    pub fn levels(&self) -> PathBuf {
        self.root.join("levels.json")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report.txt")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Reads a JSON artifact; absence is reported as a missing input with `hint`.
pub fn read_json<T: DeserializeOwned>(path: &Path, hint: &str) -> Result<T> {
    require(path, hint)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn require(path: &Path, hint: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(MissingInput(format!("{} not found; {hint}", path.display())).into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub file: String,
    pub samples: usize,
    pub duration_h: f64,
    pub equivalent_c_rate: f64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseEntry {
    pub designation: Designation,
    #[serde(flatten)]
    pub dataset: DatasetEntry,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub id: usize,
    pub members: Vec<Designation>,
    /// Sum of the reference base durations.
    pub reference_duration_h: f64,
    #[serde(flatten)]
    pub dataset: DatasetEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub base: Vec<BaseEntry>,
    pub scenarios: Vec<ScenarioEntry>,
}

/// One identification run as stored under `estimates/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseEstimate {
    pub case_id: usize,
    pub members: Vec<Designation>,
    pub dataset_duration_h: f64,
    pub swarm: SwarmConfig,
    pub search_space: SearchSpace,
    pub training_rmse: f64,
    pub result: EstimationResult,
}

/// Per-case summary written by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub record: CaseRecord,
    pub members: Vec<Designation>,
    pub errors: ParamErrorReport,
    /// Validation RMSE on the all-protocol scenario, when computed and
    /// feasible.
    pub scenario1_rmse: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn paths_are_zero_padded() {
        let l = Layout::new("out");
        assert!(l.scenario_series(3).ends_with("data/scenarios/scenario_03.csv"));
        assert!(l.estimate(21).ends_with("estimates/case_21.json"));
        assert!(l.base_series(Designation::C5).starts_with("out/data/base"));
    }
}
