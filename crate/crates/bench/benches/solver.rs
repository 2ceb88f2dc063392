use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use spmid_core::{
    run_protocol, CyclerLimits, Designation, GroupedParameters, OcpPair, PhysicalConstants, ProfileSpec,
    SolverConfig, Spm,
};

fn model(shells: usize) -> Spm {
    let solver = SolverConfig {
        n_radial_shells: shells,
        ..SolverConfig::default()
    };
    Spm::new(
        GroupedParameters::REFERENCE,
        PhysicalConstants::default(),
        solver,
        OcpPair::default(),
    )
    .unwrap()
}

fn step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_1s_1C");
    for shells in [8, 16, 32] {
        group.bench_with_input(BenchmarkId::from_parameter(shells), &shells, |b, &n| {
            let mut spm = model(n);
            let current = CyclerLimits::default().current_for(1.0);
            b.iter(|| {
                let mut state = spm.init_state();
                for _ in 0..60 {
                    spm.step(&mut state, black_box(current), 1.0).unwrap();
                }
                state
            });
        });
    }
    group.finish();
}

fn protocols(c: &mut Criterion) {
    let limits = CyclerLimits::default();
    let mut group = c.benchmark_group("protocol");
    group.sample_size(10);
    for d in [Designation::C1, Designation::Pulse, Designation::Dst] {
        let spec = ProfileSpec::default_for(d);
        group.bench_function(d.slug(), |b| {
            b.iter(|| {
                let mut spm = model(16);
                run_protocol(&mut spm, &spec, &limits).unwrap()
            })
        });
    }
    group.finish();
}

fn replay(c: &mut Criterion) {
    let limits = CyclerLimits::default();
    let mut spm = model(16);
    let measured = run_protocol(&mut spm, &ProfileSpec::default_for(Designation::C1), &limits).unwrap();
    let mut group = c.benchmark_group("replay");
    group.sample_size(20);
    group.bench_function("1C_sse", |b| b.iter(|| spm.sse(black_box(&measured)).unwrap()));
    group.finish();
}

criterion_group!(benches, step, protocols, replay);
criterion_main!(benches);
