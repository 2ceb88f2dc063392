use criterion::{criterion_group, criterion_main, Criterion};
use spmid_core::evaluation::{cost_table, select_optimal, CaseMetrics, CostOption};
use spmid_core::pso::{minimize, SwarmConfig};
use spmid_core::{
    estimate, scenario, BaseSeries, CyclerLimits, Designation, GroupedParameters, OcpPair, PhysicalConstants,
    ProfileSpec, SearchSpace, SimContext, SolverConfig,
};

fn sphere(c: &mut Criterion) {
    let config = SwarmConfig {
        n_particles: 30,
        n_iterations: 100,
        ..SwarmConfig::default()
    };
    let lower = vec![-5.0; 9];
    let upper = vec![5.0; 9];
    c.bench_function("swarm_sphere_9d", |b| {
        b.iter(|| minimize(|x: &[f64]| x.iter().map(|v| v * v).sum(), &lower, &upper, &config).unwrap())
    });
}

fn short_estimate(c: &mut Criterion) {
    let truth = GroupedParameters::REFERENCE;
    let ctx = SimContext {
        consts: PhysicalConstants::default(),
        solver: SolverConfig::default(),
        ocp: OcpPair::default(),
    };
    let base = BaseSeries::synthesize(
        &[ProfileSpec::default_for(Designation::C1)],
        &truth,
        &ctx.consts,
        &ctx.solver,
        &CyclerLimits::default(),
        &ctx.ocp,
    )
    .unwrap();
    let dataset = base.build_dataset(&scenario::scenario(29).unwrap()).unwrap();
    let config = SwarmConfig {
        n_particles: 16,
        n_iterations: 3,
        ..SwarmConfig::default()
    };
    let space = SearchSpace::default();
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    group.bench_function("case29_16x3", |b| b.iter(|| estimate(&dataset, &space, &config, &ctx).unwrap()));
    group.finish();
}

fn analytics(c: &mut Criterion) {
    let metrics: Vec<CaseMetrics> = (1..=31)
        .map(|k| CaseMetrics {
            case_id: k,
            e_y: 0.02 + 1e-3 * ((k * 7) % 31) as f64,
            e_theta: 500.0 + 60.0 * ((k * 11) % 31) as f64,
            t_total_h: 3.0 + 1.7 * ((k * 13) % 31) as f64,
        })
        .collect();
    c.bench_function("cost_table_and_optima", |b| {
        b.iter(|| {
            let t = cost_table(&metrics).unwrap();
            CostOption::ALL.map(|o| select_optimal(&t, o).unwrap().case_id)
        })
    });
}

criterion_group!(benches, sphere, short_estimate, analytics);
criterion_main!(benches);
