use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{GroupedParameters, N_PARAMS, PARAM_NAMES};
use crate::series::TimeSeries;

/// Root-mean-square voltage error between aligned series.
pub fn rmse(measured: &TimeSeries, model: &TimeSeries) -> Result<f64> {
    if measured.len() != model.len() {
        return Err(Error::LengthMismatch(measured.len(), model.len()));
    }
    if measured.is_empty() {
        return Err(Error::Empty("cannot compute RMSE of empty series"));
    }
    for (k, (a, b)) in measured.time_s.iter().zip(&model.time_s).enumerate() {
        if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::TimeMismatch {
                index: k,
                left: *a,
                right: *b,
            });
        }
    }
    let sse: f64 = measured
        .voltage_v
        .iter()
        .zip(&model.voltage_v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sse / measured.len() as f64).sqrt())
}

/// RMSE of a bare residual vector.
pub fn rmse_of(residuals: &[f64]) -> f64 {
    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    (sse / residuals.len() as f64).sqrt()
}

/// Squared-error sum and sample count of one residual set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorMass {
    pub sse: f64,
    pub n: usize,
}

impl ErrorMass {
    pub fn of(residuals: &[f64]) -> Self {
        ErrorMass {
            sse: residuals.iter().map(|e| e * e).sum(),
            n: residuals.len(),
        }
    }

    pub fn rmse(&self) -> f64 {
        (self.sse / self.n as f64).sqrt()
    }

    pub fn merge(self, other: ErrorMass) -> ErrorMass {
        ErrorMass {
            sse: self.sse + other.sse,
            n: self.n + other.n,
        }
    }
}

/// Outcome of checking how component RMSEs compose into the RMSE of their
/// union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionVerdict {
    pub component_rmse: Vec<f64>,
    pub composite_rmse: f64,
    /// Composite lies within `[min, max]` of the components.
    pub bracketed: bool,
    /// For every pair `(A, B)`: `RMSE(A) < RMSE(A ∪ B)` exactly when
    /// `RMSE(A) < RMSE(B)`.
    pub ordering_consistent: bool,
}

impl CompositionVerdict {
    pub fn holds(&self) -> bool {
        self.bracketed && self.ordering_consistent
    }
}

/// Relative slack for round-off when comparing RMSE values.
const COMPOSE_EPS: f64 = 1e-12;

/// Checks the composition rules on residual sets.
pub fn rmse_composition_check(components: &[&[f64]]) -> Result<CompositionVerdict> {
    if components.len() < 2 || components.iter().any(|c| c.is_empty()) {
        return Err(Error::Empty("composition check needs at least two non-empty components"));
    }
    let masses: Vec<ErrorMass> = components.iter().map(|c| ErrorMass::of(c)).collect();
    Ok(composition_from_masses(&masses))
}

/// Same check from precomputed error masses.
pub fn composition_from_masses(masses: &[ErrorMass]) -> CompositionVerdict {
    let rm: Vec<f64> = masses.iter().map(ErrorMass::rmse).collect();
    let total = masses.iter().fold(ErrorMass::default(), |a, &b| a.merge(b));
    let composite = total.rmse();
    let lo = rm.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = COMPOSE_EPS * hi.max(1e-300);
    let bracketed = composite >= lo - tol && composite <= hi + tol;

    let mut ordering_consistent = true;
    for a in 0..masses.len() {
        for b in 0..masses.len() {
            if a == b {
                continue;
            }
            let (ra, rb) = (rm[a], rm[b]);
            if (ra - rb).abs() <= tol {
                continue;
            }
            let union = masses[a].merge(masses[b]).rmse();
            if (ra < union) != (ra < rb) {
                ordering_consistent = false;
            }
        }
    }
    CompositionVerdict {
        component_rmse: rm,
        composite_rmse: composite,
        bracketed,
        ordering_consistent,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamErrorReport {
    /// Componentwise `|θ* − θ| / θ · 100`.
    pub delta_theta: [f64; N_PARAMS],
    pub mean_delta: f64,
    /// Euclidean distance of the raw vectors.
    pub delta_dist: f64,
}

pub fn param_errors(theta_star: &GroupedParameters, theta_true: &GroupedParameters) -> Result<ParamErrorReport> {
    let (est, truth) = (theta_star.to_array(), theta_true.to_array());
    let mut delta = [0.0; N_PARAMS];
    for k in 0..N_PARAMS {
        if truth[k] == 0.0 {
            return Err(Error::ZeroReference(PARAM_NAMES[k]));
        }
        delta[k] = ((est[k] - truth[k]) / truth[k]).abs() * 100.0;
    }
    let dist = est
        .iter()
        .zip(&truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(ParamErrorReport {
        delta_theta: delta,
        mean_delta: delta.iter().sum::<f64>() / N_PARAMS as f64,
        delta_dist: dist,
    })
}
