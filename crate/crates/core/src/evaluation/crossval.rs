use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::ErrorMass;
use crate::error::{Error, Result};
use crate::params::GroupedParameters;
use crate::protocols::Designation;
use crate::pso::SimContext;
use crate::scenario::{BaseSeries, Scenario};

/// Cases × scenarios validation RMSE, volts. `None` marks an entry whose
/// simulation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseMatrix {
    pub case_ids: Vec<usize>,
    pub scenario_ids: Vec<usize>,
    pub values: Vec<Vec<Option<f64>>>,
}

const FLAG: &str = "NA";

impl RmseMatrix {
    pub fn n_rows(&self) -> usize {
        self.case_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.scenario_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.case_ids.is_empty() || self.scenario_ids.is_empty()
    }

    pub fn row_of(&self, case_id: usize) -> Option<usize> {
        self.case_ids.iter().position(|&c| c == case_id)
    }

    pub fn col_of(&self, scenario_id: usize) -> Option<usize> {
        self.scenario_ids.iter().position(|&s| s == scenario_id)
    }

    pub fn get(&self, case_id: usize, scenario_id: usize) -> Option<f64> {
        self.values[self.row_of(case_id)?][self.col_of(scenario_id)?]
    }

    /// `(case_id, value)` pairs of a column, flagged entries skipped.
    pub fn column(&self, col: usize) -> Vec<(usize, f64)> {
        self.case_ids
            .iter()
            .zip(&self.values)
            .filter_map(|(&c, row)| row[col].map(|v| (c, v)))
            .collect()
    }

    pub fn flagged(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (r, row) in self.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((self.case_ids[r], self.scenario_ids[c]));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.case_ids.len()
            || self.values.iter().any(|r| r.len() != self.scenario_ids.len())
        {
            return Err(Error::InvalidSeries("RMSE matrix shape does not match its ids".into()));
        }
        if self.values.iter().flatten().flatten().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidSeries("RMSE matrix has negative or NaN entries".into()));
        }
        Ok(())
    }

    /// CSV with a `case` column followed by one column per scenario id.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("case");
        for s in &self.scenario_ids {
            out.push_str(&format!(",{s}"));
        }
        out.push('\n');
        for (c, row) in self.case_ids.iter().zip(&self.values) {
            out.push_str(&c.to_string());
            for v in row {
                match v {
                    Some(x) => out.push_str(&format!(",{x:?}")),
                    None => out.push_str(&format!(",{FLAG}")),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv_reader(rdr: impl Read) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
        let headers = reader.headers()?.clone();
        if headers.get(0) != Some("case") {
            return Err(Error::InvalidSeries("RMSE matrix CSV must start with a `case` column".into()));
        }
        let parse_id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::InvalidSeries(format!("bad id `{s}` in RMSE matrix")))
        };
        let scenario_ids = headers.iter().skip(1).map(parse_id).collect::<Result<Vec<_>>>()?;
        let mut case_ids = Vec::new();
        let mut values = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            case_ids.push(parse_id(&rec[0])?);
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    if s == FLAG {
                        Ok(None)
                    } else {
                        s.parse::<f64>()
                            .map(Some)
                            .map_err(|_| Error::InvalidSeries(format!("bad RMSE value `{s}`")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        let m = RmseMatrix {
            case_ids,
            scenario_ids,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(f)
    }
}

/// Replay errors of one parameter set on every base protocol it needs.
pub fn base_error_masses(
    theta: &GroupedParameters,
    base: &BaseSeries,
    needed: &[Designation],
    ctx: &SimContext,
) -> BTreeMap<Designation, Option<ErrorMass>> {
    needed
        .iter()
        .map(|&d| {
            let mass = base.get(d).and_then(|series| {
                let mut spm = ctx.spm(theta).ok()?;
                let sse = spm.sse(series).ok()?;
                Some(ErrorMass { sse, n: series.len() })
            });
            (d, mass)
        })
        .collect()
}

/// Validation RMSE of every case on every scenario.
///
/// Every segment of a scenario dataset starts from the fully charged state,
/// so a scenario's error mass is the sum of its members' error masses.
/// Each case is therefore simulated once per base protocol and the
/// scenario entries are composed from those, summing in member order.
pub fn cross_validate(
    cases: &[(usize, GroupedParameters)],
    base: &BaseSeries,
    scenarios: &[Scenario],
    ctx: &SimContext,
) -> RmseMatrix {
    let mut needed: Vec<Designation> = scenarios.iter().flat_map(|s| s.members.iter().copied()).collect();
    needed.sort();
    needed.dedup();

    let jobs: Vec<(usize, Designation)> = (0..cases.len())
        .flat_map(|i| needed.iter().map(move |&d| (i, d)))
        .collect();
    let results: Vec<Option<ErrorMass>> = jobs
        .par_iter()
        .map(|&(i, d)| base_error_masses(&cases[i].1, base, &[d], ctx)[&d])
        .collect();
    let mut masses: Vec<BTreeMap<Designation, Option<ErrorMass>>> = vec![BTreeMap::new(); cases.len()];
    for ((i, d), m) in jobs.into_iter().zip(results) {
        masses[i].insert(d, m);
    }

    let values = masses
        .iter()
        .map(|row| {
            scenarios
                .iter()
                .map(|s| {
                    s.members
                        .iter()
                        .try_fold(ErrorMass::default(), |acc, d| row[d].map(|m| acc.merge(m)))
                        .map(|m| m.rmse())
                })
                .collect()
        })
        .collect();

    RmseMatrix {
        case_ids: cases.iter().map(|c| c.0).collect(),
        scenario_ids: scenarios.iter().map(|s| s.id).collect(),
        values,
    }
}
