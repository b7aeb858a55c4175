use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use infoengine_core::pareto::{
    engine_problem, non_dominated_sort, run_engine, GaConfig, ObjectivePair, ObjectiveVector, Orientation,
};
use infoengine_core::ParamBox;

fn sorting(c: &mut Criterion) {
    // Deterministic scatter on the unit square.
    let points: Vec<ObjectiveVector> = (0..400u64)
        .map(|i| {
            let u = (i.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
            let v = (i.wrapping_mul(0xC2B2_AE3D_27D4_EB4F) >> 11) as f64 / (1u64 << 53) as f64;
            ObjectiveVector::feasible(vec![u, v]).unwrap()
        })
        .collect();
    c.bench_function("non_dominated_sort_400", |b| b.iter(|| non_dominated_sort(black_box(&points)).unwrap()));
}

fn ga(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine_front");
    group.sample_size(10);
    let problem = engine_problem(ObjectivePair::PowerVsEtaHe, ParamBox::default(), Orientation::MaxMax).unwrap();
    let config = GaConfig { population: 40, generations: 20, seed: 1, ..GaConfig::default() };
    group.bench_function("pop40_gen20", |b| b.iter(|| run_engine(black_box(&problem), &config).unwrap()));
    group.finish();
}

criterion_group!(benches, sorting, ga);
criterion_main!(benches);
