//! The 31 protocol combinations and dataset assembly.
//!
//! Ids are fixed: blocks of 5, 4, 3, 2 and 1 members, and inside each
//! block the order of the reference test matrix. Members are listed
//! constant-current first by ascending rate, then pulse, then DST.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocp::OcpPair;
use crate::params::{GroupedParameters, PhysicalConstants};
use crate::protocols::{concat_profiles, run_protocol, CyclerLimits, Designation, ProfileSpec};
use crate::series::TimeSeries;
use crate::spm::{SolverConfig, Spm};

pub const N_SCENARIOS: usize = 31;

use Designation::{Dst as D, Pulse as P, C1, C2, C5};

const MEMBERS: [&[Designation]; N_SCENARIOS] = [
    &[C5, C2, C1, P, D],
    &[C5, C2, C1, P],
    &[C5, C2, C1, D],
    &[C5, C2, P, D],
    &[C5, C1, P, D],
    &[C2, C1, P, D],
    &[C5, C2, C1],
    &[C5, C2, P],
    &[C5, C2, D],
    &[C5, C1, P],
    &[C5, C1, D],
    &[C5, P, D],
    &[C2, C1, P],
    &[C2, C1, D],
    &[C2, P, D],
    &[C1, P, D],
    &[C5, C2],
    &[C5, C1],
    &[C5, P],
    &[C5, D],
    &[C2, C1],
    &[C2, P],
    &[C2, D],
    &[C1, P],
    &[C1, D],
    &[P, D],
    &[C5],
    &[C2],
    &[C1],
    &[P],
    &[D],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: usize,
    pub members: Vec<Designation>,
    pub duration_h: f64,
}

impl Scenario {
    pub fn contains(&self, d: Designation) -> bool {
        self.members.contains(&d)
    }

    pub fn label(&self) -> String {
        let names: Vec<_> = self.members.iter().map(|d| d.as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// Base durations of the reference protocols, hours.
pub fn reference_durations() -> BTreeMap<Designation, f64> {
    Designation::ALL
        .into_iter()
        .map(|d| (d, d.reference_duration_h()))
        .collect()
}

/// All 31 scenarios with durations summed from `base_durations_h`.
pub fn enumerate_scenarios(base_durations_h: &BTreeMap<Designation, f64>) -> Result<Vec<Scenario>> {
    for d in Designation::ALL {
        if !base_durations_h.contains_key(&d) {
            return Err(Error::InvalidConfig(format!("missing base duration for {d}")));
        }
    }
    Ok(MEMBERS
        .iter()
        .enumerate()
        .map(|(i, members)| Scenario {
            id: i + 1,
            members: members.to_vec(),
            duration_h: members.iter().map(|d| base_durations_h[d]).sum(),
        })
        .collect())
}

/// Scenario by id, with reference durations.
pub fn scenario(id: usize) -> Result<Scenario> {
    if !(1..=N_SCENARIOS).contains(&id) {
        return Err(Error::InvalidConfig(format!("scenario id {id} outside 1..=31")));
    }
    let all = enumerate_scenarios(&reference_durations())?;
    Ok(all[id - 1].clone())
}

/// Id of the scenario with exactly this member set.
pub fn scenario_id_of(members: &[Designation]) -> Option<usize> {
    let mut m = members.to_vec();
    m.sort();
    m.dedup();
    MEMBERS.iter().position(|s| *s == m.as_slice()).map(|i| i + 1)
}

/// The five base protocol series for one parameter set, each simulated once.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BaseSeries {
    series: BTreeMap<Designation, TimeSeries>,
}

impl BaseSeries {
    /// Runs every protocol in `specs` (in parallel) against `params`.
    pub fn synthesize(
        specs: &[ProfileSpec],
        params: &GroupedParameters,
        consts: &PhysicalConstants,
        solver: &SolverConfig,
        limits: &CyclerLimits,
        ocp: &OcpPair,
    ) -> Result<Self> {
        let runs: Result<Vec<_>> = specs
            .par_iter()
            .map(|spec| {
                let mut spm = Spm::new(*params, *consts, *solver, ocp.clone())?;
                Ok((spec.designation, run_protocol(&mut spm, spec, limits)?))
            })
            .collect();
        Ok(BaseSeries {
            series: runs?.into_iter().collect(),
        })
    }

    pub fn from_map(series: BTreeMap<Designation, TimeSeries>) -> Self {
        BaseSeries { series }
    }

    pub fn get(&self, d: Designation) -> Option<&TimeSeries> {
        self.series.get(&d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Designation, &TimeSeries)> {
        self.series.iter().map(|(d, s)| (*d, s))
    }

    /// Concatenates the member series of `scenario`.
    pub fn build_dataset(&self, scenario: &Scenario) -> Result<TimeSeries> {
        let parts = scenario
            .members
            .iter()
            .map(|d| {
                self.series
                    .get(d)
                    .ok_or_else(|| Error::InvalidConfig(format!("base series {d} not available")))
            })
            .collect::<Result<Vec<_>>>()?;
        concat_profiles(&parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_one_distinct_nonempty_subsets() {
        let all = enumerate_scenarios(&reference_durations()).unwrap();
        assert_eq!(all.len(), 31);
        let mut seen = std::collections::HashSet::new();
        for s in &all {
            assert!(!s.members.is_empty());
            assert!(seen.insert(s.members.clone()));
        }
    }

    #[test]
    fn canonical_member_order() {
        for s in enumerate_scenarios(&reference_durations()).unwrap() {
            let mut sorted = s.members.clone();
            sorted.sort();
            assert_eq!(sorted, s.members, "scenario {}", s.id);
            if let Some(pos) = s.members.iter().position(|&d| d == Designation::Dst) {
                assert_eq!(pos, s.members.len() - 1);
            }
        }
    }

    #[test]
    fn blocks_descend_in_size() {
        let sizes: Vec<_> = enumerate_scenarios(&reference_durations())
            .unwrap()
            .iter()
            .map(|s| s.members.len())
            .collect();
        assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(sizes.iter().filter(|&&n| n == 3).count(), 10);
    }

    #[test]
    fn id_lookup() {
        assert_eq!(scenario_id_of(&[C2, C1]), Some(21));
        assert_eq!(scenario_id_of(&[D, P]), Some(26));
        assert_eq!(scenario_id_of(&[]), None);
        assert_eq!(scenario(29).unwrap().members, vec![C1]);
        assert!(scenario(0).is_err());
        assert!(scenario(32).is_err());
    }

    #[test]
    fn missing_duration_is_rejected() {
        let mut d = reference_durations();
        d.remove(&Designation::Pulse);
        assert!(enumerate_scenarios(&d).is_err());
    }
}
