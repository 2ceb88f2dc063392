//! Bounded global-best particle swarm and the voltage-fitting objective.
//!
//! All random numbers of an iteration are drawn from one seeded stream in
//! particle order before any fitness is evaluated, so results do not depend
//! on how many threads evaluate the swarm.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ocp::OcpPair;
use crate::params::{GroupedParameters, PhysicalConstants, N_PARAMS, PARAM_NAMES};
use crate::series::TimeSeries;
use crate::spm::{SolverConfig, Spm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmConfig {
    pub n_particles: usize,
    pub n_iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub rng_seed: u64,
    pub penalty_fitness: f64,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            n_particles: 50,
            n_iterations: 300,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            rng_seed: 42,
            penalty_fitness: 1e12,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_particles < 2 {
            return bad(format!("n_particles must be >= 2, got {}", self.n_particles));
        }
        if self.n_iterations < 1 {
            return bad("n_iterations must be >= 1".into());
        }
        if !(self.inertia > 0.0 && self.inertia <= 1.0) {
            return bad(format!("inertia must lie in (0, 1], got {}", self.inertia));
        }
        if !(self.cognitive > 0.0) || !(self.social > 0.0) {
            return bad("cognitive and social coefficients must be positive".into());
        }
        if !(self.penalty_fitness.is_finite() && self.penalty_fitness > 0.0) {
            return bad("penalty_fitness must be positive and finite".into());
        }
        Ok(())
    }
}

/// Box bounds on the grouped parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lower: GroupedParameters,
    pub upper: GroupedParameters,
}

impl SearchSpace {
    /// `[×lo, ×hi]` around `center`, with the stoichiometries kept inside
    /// `[0.001, 0.999]`.
    pub fn scaled_around(center: &GroupedParameters, lo: f64, hi: f64) -> Self {
        let c = center.to_array();
        let mut l = c.map(|x| x * lo);
        let mut u = c.map(|x| x * hi);
        for i in [6, 7] {
            l[i] = l[i].clamp(0.001, 0.999);
            u[i] = u[i].clamp(0.001, 0.999);
        }
        SearchSpace {
            lower: GroupedParameters::from_array(l),
            upper: GroupedParameters::from_array(u),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lower.validate()?;
        self.upper.validate()?;
        let (l, u) = (self.lower.to_array(), self.upper.to_array());
        for k in 0..N_PARAMS {
            if !(l[k] < u[k]) {
                return Err(Error::InvalidConfig(format!(
                    "search space: lower bound of {} ({}) is not below its upper bound ({})",
                    PARAM_NAMES[k], l[k], u[k]
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &GroupedParameters) -> bool {
        let (l, u, x) = (self.lower.to_array(), self.upper.to_array(), p.to_array());
        (0..N_PARAMS).all(|k| x[k] >= l[k] && x[k] <= u[k])
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self::scaled_around(&GroupedParameters::REFERENCE, 0.2, 5.0)
    }
}

/// Everything besides θ needed to simulate a dataset.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub consts: PhysicalConstants,
    pub solver: SolverConfig,
    pub ocp: OcpPair,
}

impl Default for SimContext {
    fn default() -> Self {
        SimContext {
            consts: PhysicalConstants::default(),
            solver: SolverConfig::default(),
            ocp: OcpPair::default(),
        }
    }
}

impl SimContext {
    pub fn spm(&self, theta: &GroupedParameters) -> Result<Spm> {
        Spm::new(*theta, self.consts, self.solver, self.ocp.clone())
    }
}

/// Sum of squared voltage residuals of `theta` on `dataset`; any failure
/// to simulate costs `penalty`.
pub fn objective(theta: &GroupedParameters, dataset: &TimeSeries, ctx: &SimContext, penalty: f64) -> f64 {
    let sse = ctx.spm(theta).and_then(|mut spm| spm.sse(dataset));
    match sse {
        Ok(v) if v.is_finite() => v,
        _ => penalty,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_star: GroupedParameters,
    pub best_fitness: f64,
    /// Best fitness after each iteration.
    pub history: Vec<f64>,
    pub t_opt_s: f64,
    pub n_samples: usize,
}

impl EstimationResult {
    /// Training RMSE implied by the best fitness.
    pub fn training_rmse(&self) -> f64 {
        (self.best_fitness / self.n_samples as f64).sqrt()
    }
}

/// Raw swarm outcome over an arbitrary box.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmOutcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    pub history: Vec<f64>,
}

/// Minimizes `f` over the box `[lower, upper]`.
///
/// `f` is called concurrently; non-finite values are replaced by the
/// configured penalty.
pub fn minimize<F>(f: F, lower: &[f64], upper: &[f64], config: &SwarmConfig) -> Result<SwarmOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let dim = lower.len();
    if dim == 0 || upper.len() != dim || lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
        return Err(Error::InvalidConfig("search box must have lower < upper in every dimension".into()));
    }
    let n = config.n_particles;
    let span: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut pos: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|k| lower[k] + rng.gen::<f64>() * span[k]).collect())
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|k| 0.1 * span[k] * (2.0 * rng.gen::<f64>() - 1.0)).collect())
        .collect();

    let penalty = config.penalty_fitness;
    let eval = |pos: &[Vec<f64>]| -> Vec<f64> {
        pos.par_iter()
            .map(|x| {
                let v = f(x);
                if v.is_finite() {
                    v
                } else {
                    penalty
                }
            })
            .collect()
    };

    let mut fit = eval(&pos);
    let mut pbest = pos.clone();
    let mut pbest_fit = fit.clone();
    let mut g = argmin(&pbest_fit);
    let mut gbest = pbest[g].clone();
    let mut gbest_fit = pbest_fit[g];
    let mut history = Vec::with_capacity(config.n_iterations);

    for _ in 0..config.n_iterations {
        // draws first, in particle order
        let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .map(|_| {
                let r1 = (0..dim).map(|_| rng.gen::<f64>()).collect();
                let r2 = (0..dim).map(|_| rng.gen::<f64>()).collect();
                (r1, r2)
            })
            .collect();
        for (i, (r1, r2)) in draws.iter().enumerate() {
            let (x, v) = (&mut pos[i], &mut vel[i]);
            for k in 0..dim {
                v[k] = config.inertia * v[k]
                    + config.cognitive * r1[k] * (pbest[i][k] - x[k])
                    + config.social * r2[k] * (gbest[k] - x[k]);
                x[k] += v[k];
                if x[k] < lower[k] {
                    x[k] = lower[k];
                    v[k] = 0.0;
                } else if x[k] > upper[k] {
                    x[k] = upper[k];
                    v[k] = 0.0;
                }
            }
        }
        fit = eval(&pos);
        for i in 0..n {
            if fit[i] < pbest_fit[i] {
                pbest_fit[i] = fit[i];
                pbest[i].clone_from(&pos[i]);
            }
        }
        g = argmin(&pbest_fit);
        if pbest_fit[g] < gbest_fit {
            gbest_fit = pbest_fit[g];
            gbest.clone_from(&pbest[g]);
        }
        history.push(gbest_fit);
    }

    Ok(SwarmOutcome {
        best_position: gbest,
        best_fitness: gbest_fit,
        history,
    })
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// Fits the grouped parameters to `dataset`.
pub fn estimate(
    dataset: &TimeSeries,
    space: &SearchSpace,
    config: &SwarmConfig,
    ctx: &SimContext,
) -> Result<EstimationResult> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset has no samples"));
    }
    space.validate()?;
    config.validate()?;
    let started = Instant::now();
    let lower = space.lower.to_array();
    let upper = space.upper.to_array();
    let out = minimize(
        |x| {
            let theta = GroupedParameters::from_array(x.try_into().expect("nine components"));
            objective(&theta, dataset, ctx, config.penalty_fitness)
        },
        &lower,
        &upper,
        config,
    )?;
    let theta_star = GroupedParameters::from_array(
        out.best_position
            .as_slice()
            .try_into()
            .expect("nine components"),
    );
    Ok(EstimationResult {
        theta_star,
        best_fitness: out.best_fitness,
        history: out.history,
        t_opt_s: started.elapsed().as_secs_f64(),
        n_samples: dataset.len(),
    })
}
