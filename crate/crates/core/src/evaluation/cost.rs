use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::GroupedParameters;

/// Per-case bookkeeping of an identification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case_id: usize,
    pub theta_star: GroupedParameters,
    /// Wall-clock estimation time, hours.
    pub t_opt_h: f64,
    /// Experiment (dataset) duration, hours.
    pub t_exp_h: f64,
    pub t_total_h: f64,
    pub training_rmse: f64,
}

impl CaseRecord {
    pub fn new(case_id: usize, theta_star: GroupedParameters, t_opt_h: f64, t_exp_h: f64, training_rmse: f64) -> Self {
        CaseRecord {
            case_id,
            theta_star,
            t_opt_h,
            t_exp_h,
            t_total_h: t_opt_h + t_exp_h,
            training_rmse,
        }
    }
}

/// The three raw criteria of one case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseMetrics {
    pub case_id: usize,
    /// Mean validation RMSE, volts.
    pub e_y: f64,
    /// Euclidean parameter distance.
    pub e_theta: f64,
    pub t_total_h: f64,
}

pub const METRICS_HEADER: [&str; 4] = ["case", "e_y_v", "e_theta", "t_total_h"];

pub fn metrics_from_csv_reader(rdr: impl Read) -> Result<Vec<CaseMetrics>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != METRICS_HEADER {
        return Err(Error::InvalidSeries(format!(
            "metrics CSV header must be `{}`",
            METRICS_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|_| Error::InvalidSeries(format!("bad number `{}` in metrics CSV", &rec[k])))
        };
        let case_id = rec[0]
            .parse::<usize>()
            .map_err(|_| Error::InvalidSeries(format!("bad case id `{}`", &rec[0])))?;
        out.push(CaseMetrics {
            case_id,
            e_y: num(1)?,
            e_theta: num(2)?,
            t_total_h: num(3)?,
        });
    }
    Ok(out)
}

pub fn load_metrics(path: impl AsRef<Path>) -> Result<Vec<CaseMetrics>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    metrics_from_csv_reader(f)
}

pub fn metrics_to_csv_string(metrics: &[CaseMetrics]) -> String {
    let mut out = METRICS_HEADER.join(",");
    out.push('\n');
    for m in metrics {
        out.push_str(&format!("{},{:?},{:?},{:?}\n", m.case_id, m.e_y, m.e_theta, m.t_total_h));
    }
    out
}

/// Min–max normalization to `[0, 1]`.
pub fn normalize_column(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("cannot normalize an empty column"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::DegenerateNormalization(lo));
    }
    Ok(values.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

/// Weights of the accuracy, parameter and time criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CostWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let w = CostWeights { alpha, beta, gamma };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.alpha, self.beta, self.gamma];
        if parts.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::InvalidConfig(format!("cost weights must lie in [0, 1], got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("cost weights must sum to 1, got {sum}")));
        }
        Ok(())
    }

    pub fn apply(&self, e_y: f64, e_theta: f64, t: f64) -> f64 {
        self.alpha * e_y + self.beta * e_theta + self.gamma * t
    }
}

/// The seven standard weightings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CostOption {
    O1,
    O2,
    O3,
    O4,
    O5,
    O6,
    O7,
}

impl CostOption {
    pub const ALL: [CostOption; 7] = [
        CostOption::O1,
        CostOption::O2,
        CostOption::O3,
        CostOption::O4,
        CostOption::O5,
        CostOption::O6,
        CostOption::O7,
    ];

    pub fn weights(self) -> CostWeights {
        let (alpha, beta, gamma) = match self {
            CostOption::O1 => (1.0, 0.0, 0.0),
            CostOption::O2 => (0.0, 1.0, 0.0),
            CostOption::O3 => (0.0, 0.0, 1.0),
            CostOption::O4 => (0.5, 0.5, 0.0),
            CostOption::O5 => (0.5, 0.0, 0.5),
            CostOption::O6 => (0.0, 0.5, 0.5),
            CostOption::O7 => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        };
        CostWeights { alpha, beta, gamma }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CostOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O{}", self.index() + 1)
    }
}

impl FromStr for CostOption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostOption::ALL
            .into_iter()
            .find(|o| o.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown cost option `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub metrics: CaseMetrics,
    /// Normalized `[e_y, e_theta, t_total]`.
    pub normalized: [f64; 3],
    /// Cost under each of the seven options.
    pub j: [f64; 7],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub rows: Vec<CostRow>,
}

/// Normalizes the three criteria across cases and evaluates every option.
pub fn cost_table(metrics: &[CaseMetrics]) -> Result<CostTable> {
    let col = |f: fn(&CaseMetrics) -> f64| normalize_column(&metrics.iter().map(f).collect::<Vec<_>>());
    let ny = col(|m| m.e_y)?;
    let nt = col(|m| m.e_theta)?;
    let ntime = col(|m| m.t_total_h)?;
    let rows = metrics
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let normalized = [ny[k], nt[k], ntime[k]];
            let j = CostOption::ALL.map(|o| o.weights().apply(ny[k], nt[k], ntime[k]));
            CostRow {
                metrics: *m,
                normalized,
                j,
            }
        })
        .collect();
    Ok(CostTable { rows })
}

impl CostTable {
    pub fn row(&self, case_id: usize) -> Option<&CostRow> {
        self.rows.iter().find(|r| r.metrics.case_id == case_id)
    }

    /// Rounded to display precision: RMSE 4 decimals, parameter distance 2,
    /// time 1, costs 3.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("case,e_y_v,e_theta,t_total_h,O1,O2,O3,O4,O5,O6,O7\n");
        for r in &self.rows {
            let m = &r.metrics;
            out.push_str(&format!("{},{:.4},{:.2},{:.1}", m.case_id, m.e_y, m.e_theta, m.t_total_h));
            for j in r.j {
                out.push_str(&format!(",{j:.3}"));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub option: CostOption,
    pub weights: CostWeights,
    pub case_id: usize,
    pub j: f64,
    /// Other cases whose cost equals the minimum; the lowest id wins.
    pub tied_with: Vec<usize>,
}

/// Case minimizing the cost of `option`.
pub fn select_optimal(table: &CostTable, option: CostOption) -> Result<Selection> {
    select_with_weights(table, option.weights()).map(|mut s| {
        s.option = option;
        s
    })
}

/// Case minimizing an arbitrary weighting; `option` in the result is
/// meaningless unless set by the caller.
pub fn select_with_weights(table: &CostTable, weights: CostWeights) -> Result<Selection> {
    weights.validate()?;
    let costs: Vec<(usize, f64)> = table
        .rows
        .iter()
        .map(|r| {
            let [a, b, c] = r.normalized;
            (r.metrics.case_id, weights.apply(a, b, c))
        })
        .collect();
    let best = costs
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(Error::Empty("cost table has no rows"))?;
    let tol = 1e-12;
    let tied_with = costs
        .iter()
        .filter(|(id, j)| *id != best.0 && (j - best.1).abs() <= tol)
        .map(|(id, _)| *id)
        .collect();
    Ok(Selection {
        option: CostOption::O1,
        weights,
        case_id: best.0,
        j: best.1,
        tied_with,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_maps_to_unit_interval() {
        let n = normalize_column(&[2.0, 4.0, 3.0]).unwrap();
        assert_eq!(n, vec![0.0, 1.0, 0.5]);
        assert!(matches!(normalize_column(&[1.0, 1.0]), Err(Error::DegenerateNormalization(_))));
        assert!(normalize_column(&[]).is_err());
    }

    #[test]
    fn option_weights_sum_to_one() {
        for o in CostOption::ALL {
            o.weights().validate().unwrap();
        }
        assert_eq!("o5".parse::<CostOption>().unwrap(), CostOption::O5);
        assert_eq!(CostOption::O7.to_string(), "O7");
        assert!(CostWeights::new(0.5, 0.6, 0.0).is_err());
        assert!(CostWeights::new(-0.1, 0.6, 0.5).is_err());
    }

    #[test]
    fn three_case_selection() {
        let m = [
            CaseMetrics { case_id: 1, e_y: 0.02, e_theta: 10.0, t_total_h: 50.0 },
            CaseMetrics { case_id: 2, e_y: 0.04, e_theta: 1.0, t_total_h: 10.0 },
            CaseMetrics { case_id: 3, e_y: 0.03, e_theta: 5.0, t_total_h: 2.0 },
        ];
        let t = cost_table(&m).unwrap();
        assert_eq!(select_optimal(&t, CostOption::O1).unwrap().case_id, 1);
        assert_eq!(select_optimal(&t, CostOption::O2).unwrap().case_id, 2);
        assert_eq!(select_optimal(&t, CostOption::O3).unwrap().case_id, 3);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let m = [
            CaseMetrics { case_id: 7, e_y: 0.01, e_theta: 1.0, t_total_h: 1.0 },
            CaseMetrics { case_id: 4, e_y: 0.01, e_theta: 2.0, t_total_h: 2.0 },
            CaseMetrics { case_id: 9, e_y: 0.02, e_theta: 3.0, t_total_h: 3.0 },
        ];
        let s = select_optimal(&cost_table(&m).unwrap(), CostOption::O1).unwrap();
        assert_eq!(s.case_id, 4);
        assert_eq!(s.tied_with, vec![7]);
    }

    #[test]
    fn metrics_csv_round_trip() {
        let m = vec![CaseMetrics { case_id: 21, e_y: 0.0275, e_theta: 1362.04, t_total_h: 7.8 }];
        let back = metrics_from_csv_reader(metrics_to_csv_string(&m).as_bytes()).unwrap();
        assert_eq!(back, m);
        assert!(metrics_from_csv_reader("a,b,c,d\n".as_bytes()).is_err());
    }

    #[test]
    fn total_time_is_sum() {
        let r = CaseRecord::new(3, GroupedParameters::REFERENCE, 0.25, 23.0, 0.001);
        assert_eq!(r.t_total_h, 23.25);
    }
}
