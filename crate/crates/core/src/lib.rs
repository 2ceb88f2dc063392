//! Grouped-parameter single particle model, cycling protocols, swarm-based
//! parameter identification and the dataset-selection analytics built on
//! top of them.
//!
//! The usual flow is:
//!
//! 1. [`scenario::BaseSeries::synthesize`] runs the five base protocols on a
//!    ground-truth parameter set;
//! 2. [`scenario::BaseSeries::build_dataset`] concatenates them into any of
//!    the 31 scenario datasets;
//! 3. [`pso::estimate`] identifies parameters from one dataset;
//! 4. [`evaluation::cross_validate`] scores every estimate on every scenario,
//!    and [`evaluation::cost_table`] / [`evaluation::level_reports`] rank
//!    the datasets.

pub mod error;
pub mod evaluation;
pub mod ocp;
pub mod params;
pub mod protocols;
pub mod pso;
pub mod scenario;
pub mod series;
pub mod spm;

pub use error::{Error, Result};
pub use ocp::{OcpCurve, OcpPair};
pub use params::{Electrode, GroupedParameters, PhysicalConstants, N_PARAMS, PARAM_NAMES};
pub use protocols::{run_protocol, CyclerLimits, Designation, ProfileSpec, ProtocolCategory, ProtocolKind};
pub use pso::{estimate, EstimationResult, SearchSpace, SimContext, SwarmConfig};
pub use scenario::{enumerate_scenarios, BaseSeries, Scenario, N_SCENARIOS};
pub use series::{Segment, TimeSeries};
pub use spm::{CellState, SolverConfig, Spm};

/// What to drive the model with.
#[derive(Debug, Clone)]
pub enum Drive<'a> {
    /// Replay a recorded current.
    Current(&'a TimeSeries),
    /// Run a cycler protocol from the fully charged state.
    Protocol(&'a ProfileSpec, &'a CyclerLimits),
}

/// Simulates the cell under `drive` and returns the time, current and
/// terminal-voltage series.
pub fn simulate(
    params: &GroupedParameters,
    consts: &PhysicalConstants,
    solver: &SolverConfig,
    ocp: &OcpPair,
    drive: Drive<'_>,
) -> Result<TimeSeries> {
    let mut spm = Spm::new(*params, *consts, *solver, ocp.clone())?;
    match drive {
        Drive::Current(profile) => spm.simulate_current(profile),
        Drive::Protocol(spec, limits) => run_protocol(&mut spm, spec, limits),
    }
}
