use std::path::PathBuf;

use thiserror::Error;

use crate::params::Electrode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The solver produced a stoichiometry outside `[0, 1]`.
    #[error("infeasible {electrode} electrode state at t = {time_s:.3} s (stoichiometry {value:.6})")]
    Infeasible {
        electrode: Electrode,
        time_s: f64,
        value: f64,
    },

    #[error("kinetic singularity: surface stoichiometry {0} is not strictly inside (0, 1)")]
    KineticSingularity(f64),

    #[error("OCP curve `{curve}` queried at {query}, outside its domain [{min}, {max}]")]
    OcpDomain {
        curve: String,
        query: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid OCP curve `{curve}`: {reason}")]
    InvalidCurve { curve: String, reason: String },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("protocol `{designation}` exceeded its duration cap of {max_duration_s} s")]
    DurationExceeded {
        designation: String,
        max_duration_s: f64,
    },

    #[error("cannot concatenate profiles: {0}")]
    Concat(String),

    #[error("cannot normalize a constant column (value {0})")]
    DegenerateNormalization(f64),

    #[error("zero reference component `{0}` in parameter error")]
    ZeroReference(&'static str),

    #[error("length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),

    #[error("timestamp mismatch at sample {index}: {left} vs {right}")]
    TimeMismatch { index: usize, left: f64, right: f64 },

    #[error("{0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that mean "this parameter set cannot drive the
    /// profile", as opposed to bad input or I/O.
    pub fn is_simulation_failure(&self) -> bool {
        matches!(
            self,
            Error::Infeasible { .. } | Error::KineticSingularity(_) | Error::OcpDomain { .. }
        )
    }
}
