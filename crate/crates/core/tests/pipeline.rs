//! Synthesis → estimation → cross-validation on the default cell.

use spmid_core::evaluation::{base_error_masses, cross_validate, ErrorMass};
use spmid_core::scenario::{reference_durations, scenario};
use spmid_core::{
    enumerate_scenarios, estimate, BaseSeries, CyclerLimits, Designation, GroupedParameters, ProfileSpec,
    SearchSpace, SimContext, SwarmConfig,
};

fn ground_truth(ctx: &SimContext) -> BaseSeries {
    BaseSeries::synthesize(
        &ProfileSpec::default_set(),
        &GroupedParameters::REFERENCE,
        &ctx.consts,
        &ctx.solver,
        &CyclerLimits::default(),
        &ctx.ocp,
    )
    .unwrap()
}

#[test]
fn true_parameters_reproduce_every_scenario() {
    let ctx = SimContext::default();
    let base = ground_truth(&ctx);
    let scenarios = enumerate_scenarios(&reference_durations()).unwrap();
    let m = cross_validate(&[(0, GroupedParameters::REFERENCE)], &base, &scenarios, &ctx);
    assert!(m.flagged().is_empty());
    for v in m.values[0].iter().flatten() {
        assert!(*v < 1e-12, "{v}");
    }
}

#[test]
fn scenario_error_is_composed_from_its_members() {
    let ctx = SimContext::default();
    let base = ground_truth(&ctx);
    let mut theta = GroupedParameters::REFERENCE;
    theta.r0 *= 1.5;
    theta.d_pos *= 0.8;
    let s = scenario(6).unwrap();
    let dataset = base.build_dataset(&s).unwrap();
    let direct = (ctx.spm(&theta).unwrap().sse(&dataset).unwrap() / dataset.len() as f64).sqrt();

    let masses = base_error_masses(&theta, &base, &s.members, &ctx);
    let composed = s
        .members
        .iter()
        .fold(ErrorMass::default(), |acc, d| acc.merge(masses[d].unwrap()))
        .rmse();
    assert!((direct - composed).abs() <= 1e-12 * direct, "{direct} vs {composed}");

    let m = cross_validate(&[(6, theta)], &base, &[s], &ctx);
    assert!((m.get(6, 6).unwrap() - direct).abs() <= 1e-12 * direct);
}

#[test]
fn diagonal_entry_equals_training_rmse() {
    let ctx = SimContext::default();
    let base = ground_truth(&ctx);
    let s = scenario(31).unwrap();
    assert_eq!(s.members, vec![Designation::Dst]);
    let dataset = base.build_dataset(&s).unwrap();
    let swarm = SwarmConfig {
        n_particles: 8,
        n_iterations: 4,
        rng_seed: 3,
        ..SwarmConfig::default()
    };
    let space = SearchSpace::scaled_around(&GroupedParameters::REFERENCE, 0.95, 1.05);
    let r = estimate(&dataset, &space, &swarm, &ctx).unwrap();
    let m = cross_validate(&[(31, r.theta_star)], &base, &[s], &ctx);
    let diag = m.get(31, 31).unwrap();
    assert!((diag - r.training_rmse()).abs() <= 1e-12 * diag, "{diag} vs {}", r.training_rmse());
}

#[test]
fn estimation_is_reproducible_for_a_seed() {
    let ctx = SimContext::default();
    let base = ground_truth(&ctx);
    let dataset = base.build_dataset(&scenario(31).unwrap()).unwrap();
    let swarm = SwarmConfig {
        n_particles: 6,
        n_iterations: 3,
        rng_seed: 11,
        ..SwarmConfig::default()
    };
    let space = SearchSpace::default();
    let a = estimate(&dataset, &space, &swarm, &ctx).unwrap();
    let b = estimate(&dataset, &space, &swarm, &ctx).unwrap();
    assert_eq!(a.theta_star, b.theta_star);
    assert_eq!(a.training_rmse(), b.training_rmse());
}
