use serde::{Deserialize, Serialize};

use super::cost::{CaseMetrics, Selection};
use super::crossval::RmseMatrix;
use super::metrics::ParamErrorReport;
use crate::protocols::{Designation, ProtocolCategory};
use crate::scenario::Scenario;

/// Column rankings keep at most this many cases.
pub const MAX_RANKING: usize = 5;

pub const SWAP_RULE_NOTE: &str = "a swap is reported only when exactly one member is removed and one added \
within the same category (constant-current or dynamic); other changes are listed as additions and exclusions";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub case_id: usize,
    pub scenario_id: usize,
    pub rmse: f64,
}

/// Changes turning a scenario's own member set into another member set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDiff {
    pub added: Vec<Designation>,
    pub excluded: Vec<Designation>,
    /// `(removed, added)` pairs.
    pub swapped: Vec<(Designation, Designation)>,
}

impl DatasetDiff {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.excluded.is_empty() && self.swapped.is_empty()
    }
}

/// Differences between `ideal` and `actual`, classified per category.
pub fn dataset_diff(ideal: &[Designation], actual: &[Designation]) -> DatasetDiff {
    let mut diff = DatasetDiff::default();
    for cat in [ProtocolCategory::ConstantCurrent, ProtocolCategory::Dynamic] {
        let removed: Vec<_> = ideal
            .iter()
            .copied()
            .filter(|d| d.category() == cat && !actual.contains(d))
            .collect();
        let added: Vec<_> = actual
            .iter()
            .copied()
            .filter(|d| d.category() == cat && !ideal.contains(d))
            .collect();
        if removed.len() == 1 && added.len() == 1 {
            diff.swapped.push((removed[0], added[0]));
        } else {
            diff.excluded.extend(removed);
            diff.added.extend(added);
        }
    }
    diff.added.sort();
    diff.excluded.sort();
    diff
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMinimum {
    pub scenario_id: usize,
    pub case_id: usize,
    pub rmse: f64,
    pub diagonal_rmse: Option<f64>,
    /// From the scenario's own members to the minimizing case's members.
    pub diff: DatasetDiff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRanking {
    pub scenario_id: usize,
    /// Up to five `(case, rmse)` pairs, best first.
    pub ranking: Vec<(usize, f64)>,
    /// 1-based rank of the diagonal case within the column, if present.
    pub diagonal_rank: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLevel {
    pub case_id: usize,
    pub errors: ParamErrorReport,
    pub t_total_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    /// Every case validated on scenario 1.
    pub l0: Vec<(usize, f64)>,
    pub l1: Option<Entry>,
    pub l2: Option<Entry>,
    pub l3: Vec<ColumnMinimum>,
    pub l4: Vec<ColumnRanking>,
    pub l5: Vec<Entry>,
    pub l6: Option<Vec<ParameterLevel>>,
    pub l7: Option<Vec<Selection>>,
    /// Column-normalized matrix; `None` for flagged entries and for columns
    /// whose values are all equal.
    pub normalized: Vec<Vec<Option<f64>>>,
    pub flagged: Vec<(usize, usize)>,
    pub swap_rule: String,
}

/// Scans the matrix for the matrix-only levels. Flagged entries take no part
/// in any minimum or maximum. Ties go to the lowest case id.
pub fn level_reports(matrix: &RmseMatrix, scenarios: &[Scenario]) -> LevelReport {
    let members_of = |id: usize| scenarios.iter().find(|s| s.id == id).map(|s| s.members.as_slice());
    let better = |a: &Entry, b: &Entry| a.rmse < b.rmse || (a.rmse == b.rmse && a.case_id < b.case_id);

    let mut all = Vec::new();
    for (r, row) in matrix.values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if let Some(rmse) = v {
                all.push(Entry {
                    case_id: matrix.case_ids[r],
                    scenario_id: matrix.scenario_ids[c],
                    rmse: *rmse,
                });
            }
        }
    }
    let pick = |it: &mut dyn Iterator<Item = &Entry>, want_min: bool| {
        it.fold(None::<Entry>, |best, e| match best {
            None => Some(*e),
            Some(b) => {
                let replace = if want_min {
                    better(e, &b)
                } else {
                    e.rmse > b.rmse || (e.rmse == b.rmse && e.case_id < b.case_id)
                };
                Some(if replace { *e } else { b })
            }
        })
    };

    let l1 = pick(&mut all.iter(), true);
    let l2 = pick(&mut all.iter().filter(|e| e.case_id == e.scenario_id), true);
    let l0 = matrix
        .col_of(1)
        .map(|c| matrix.column(c))
        .unwrap_or_default();

    let mut l3 = Vec::new();
    let mut l4 = Vec::new();
    let mut l5 = Vec::new();
    let mut normalized = vec![vec![None; matrix.n_cols()]; matrix.n_rows()];
    for (c, &sid) in matrix.scenario_ids.iter().enumerate() {
        let col: Vec<&Entry> = all.iter().filter(|e| e.scenario_id == sid).collect();
        if col.is_empty() {
            continue;
        }
        let min = pick(&mut col.iter().copied(), true).expect("non-empty column");
        let max = pick(&mut col.iter().copied(), false).expect("non-empty column");
        let diff = match (members_of(sid), members_of(min.case_id)) {
            (Some(ideal), Some(actual)) => dataset_diff(ideal, actual),
            _ => DatasetDiff::default(),
        };
        l3.push(ColumnMinimum {
            scenario_id: sid,
            case_id: min.case_id,
            rmse: min.rmse,
            diagonal_rmse: matrix.get(sid, sid),
            diff,
        });
        l5.push(max);

        let mut sorted: Vec<(usize, f64)> = col.iter().map(|e| (e.case_id, e.rmse)).collect();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let diagonal_rank = sorted.iter().position(|&(cid, _)| cid == sid).map(|p| p + 1);
        sorted.truncate(MAX_RANKING);
        l4.push(ColumnRanking {
            scenario_id: sid,
            ranking: sorted,
            diagonal_rank,
        });

        if max.rmse > min.rmse {
            for (r, row) in matrix.values.iter().enumerate() {
                normalized[r][c] = row[c].map(|v| (v - min.rmse) / (max.rmse - min.rmse));
            }
        }
    }

    LevelReport {
        l0,
        l1,
        l2,
        l3,
        l4,
        l5,
        l6: None,
        l7: None,
        normalized,
        flagged: matrix.flagged(),
        swap_rule: SWAP_RULE_NOTE.to_string(),
    }
}

impl LevelReport {
    /// Attaches parameter errors and total times.
    pub fn with_parameter_level(mut self, errors: Vec<(usize, ParamErrorReport)>, metrics: &[CaseMetrics]) -> Self {
        self.l6 = Some(
            errors
                .into_iter()
                .map(|(case_id, errors)| ParameterLevel {
                    case_id,
                    errors,
                    t_total_h: metrics.iter().find(|m| m.case_id == case_id).map(|m| m.t_total_h),
                })
                .collect(),
        );
        self
    }

    pub fn with_optima(mut self, optima: Vec<Selection>) -> Self {
        self.l7 = Some(optima);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{enumerate_scenarios, reference_durations, scenario};
    use Designation::{Dst as D, Pulse as P, C1, C2, C5};

    #[test]
    fn published_dataset_changes() {
        // Column-minimizing member set per scenario and the resulting
        // (added, excluded, swapped) changes, scenario by scenario.
        type Row = (&'static [Designation], &'static [Designation], &'static [Designation], &'static [(Designation, Designation)]);
        let rows: [Row; 31] = [
            (&[C5, C2, C1, P, D], &[], &[], &[]),
            (&[C5, C2, C1, P, D], &[D], &[], &[]),
            (&[C5, C2, D], &[], &[C1], &[]),
            (&[C5, C2, P, D], &[], &[], &[]),
            (&[C5, C1, P, D], &[], &[], &[]),
            (&[C5, C1, P, D], &[], &[], &[(C2, C5)]),
            (&[C5, C2, C1], &[], &[], &[]),
            (&[C5, C2, P], &[], &[], &[]),
            (&[C5, C2, D], &[], &[], &[]),
            (&[C5, C1, P, D], &[D], &[], &[]),
            (&[C5, C1, D], &[], &[], &[]),
            (&[C5, P, D], &[], &[], &[]),
            (&[C5, C1, P, D], &[D], &[], &[(C2, C5)]),
            (&[C2, C1, D], &[], &[], &[]),
            (&[C2, D], &[], &[P], &[]),
            (&[C1, P, D], &[], &[], &[]),
            (&[C5, C2, C1], &[C1], &[], &[]),
            (&[C5, C2, C1], &[C2], &[], &[]),
            (&[C5, P, D], &[D], &[], &[]),
            (&[C5, P, D], &[P], &[], &[]),
            (&[C2, C1, D], &[D], &[], &[]),
            (&[C2, D], &[], &[], &[(P, D)]),
            (&[C2, D], &[], &[], &[]),
            (&[C1, P, D], &[D], &[], &[]),
            (&[C1, P, D], &[P], &[], &[]),
            (&[P, D], &[], &[], &[]),
            (&[C5, C2, C1], &[C2, C1], &[], &[]),
            (&[C2, D], &[D], &[], &[]),
            (&[C1], &[], &[], &[]),
            (&[P, D], &[D], &[], &[]),
            (&[C5, C2, C1, P, D], &[C5, C2, C1, P], &[], &[]),
        ];
        for (k, (actual, added, excluded, swapped)) in rows.iter().enumerate() {
            let ideal = scenario(k + 1).unwrap().members;
            let d = dataset_diff(&ideal, actual);
            assert_eq!(d.added, *added, "scenario {}", k + 1);
            assert_eq!(d.excluded, *excluded, "scenario {}", k + 1);
            assert_eq!(d.swapped, *swapped, "scenario {}", k + 1);
        }
    }

    #[test]
    fn two_for_one_is_not_a_swap() {
        let d = dataset_diff(&[C5, C2], &[C1]);
        assert!(d.swapped.is_empty());
        assert_eq!(d.added, vec![C1]);
        assert_eq!(d.excluded, vec![C5, C2]);
    }

    fn hand_matrix() -> RmseMatrix {
        RmseMatrix {
            case_ids: vec![1, 2, 3],
            scenario_ids: vec![1, 2, 3],
            values: vec![
                vec![Some(0.030), Some(0.020), Some(0.050)],
                vec![Some(0.025), Some(0.015), None],
                vec![Some(0.040), Some(0.010), Some(0.012)],
            ],
        }
    }

    #[test]
    fn hand_matrix_matches_brute_force() {
        let m = hand_matrix();
        let scen = enumerate_scenarios(&reference_durations()).unwrap();
        let rep = level_reports(&m, &scen);

        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        let mut best_diag = (usize::MAX, f64::INFINITY);
        for (r, row) in m.values.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if let Some(v) = *v {
                    if v < best.2 {
                        best = (m.case_ids[r], m.scenario_ids[c], v);
                    }
                    if r == c && v < best_diag.1 {
                        best_diag = (m.case_ids[r], v);
                    }
                }
            }
        }
        let l1 = rep.l1.unwrap();
        assert_eq!((l1.case_id, l1.scenario_id, l1.rmse), best);
        let l2 = rep.l2.unwrap();
        assert_eq!((l2.case_id, l2.rmse), best_diag);
        assert_eq!(l2.case_id, 3);

        let maxes: Vec<_> = rep.l5.iter().map(|e| (e.scenario_id, e.case_id)).collect();
        assert_eq!(maxes, vec![(1, 3), (2, 1), (3, 1)]);
        assert_eq!(rep.flagged, vec![(2, 3)]);
        assert_eq!(rep.normalized[1][2], None);
        assert_eq!(rep.normalized[2][1], Some(0.0));
        assert_eq!(rep.normalized[0][1], Some(1.0));
        assert_eq!(rep.l0, vec![(1, 0.030), (2, 0.025), (3, 0.040)]);
        assert_eq!(rep.l4[1].ranking[0].0, 3);
        assert_eq!(rep.l4[1].diagonal_rank, Some(2));
    }

    #[test]
    fn dominant_diagonal_means_no_diffs() {
        let ids: Vec<usize> = (1..=31).collect();
        let values = ids
            .iter()
            .map(|&r| ids.iter().map(|&c| Some(if r == c { 0.001 } else { 0.01 + 1e-4 * r as f64 })).collect())
            .collect();
        let m = RmseMatrix {
            case_ids: ids.clone(),
            scenario_ids: ids,
            values,
        };
        let rep = level_reports(&m, &enumerate_scenarios(&reference_durations()).unwrap());
        assert_eq!(rep.l3.len(), 31);
        assert!(rep.l3.iter().all(|c| c.diff.is_empty() && c.case_id == c.scenario_id));
        assert!(rep.l4.iter().all(|c| c.diagonal_rank == Some(1) && c.ranking.len() == MAX_RANKING));
    }

    #[test]
    fn added_dst_is_reported() {
        // Scenario 7 {C/5,C/2,1C} minimized by case 3 {C/5,C/2,1C,DST}.
        let m = RmseMatrix {
            case_ids: vec![3, 7],
            scenario_ids: vec![7],
            values: vec![vec![Some(0.01)], vec![Some(0.02)]],
        };
        let rep = level_reports(&m, &enumerate_scenarios(&reference_durations()).unwrap());
        assert_eq!(rep.l3[0].diff.added, vec![D]);
        assert!(rep.l3[0].diff.excluded.is_empty() && rep.l3[0].diff.swapped.is_empty());
    }
}
