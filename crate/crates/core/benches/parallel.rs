use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rough_sio::kernel::{CatalogueKernel, KernelSpec, RadialFactor, RadialProfile, Resolution};
use rough_sio::maximal::{m_sh, random_bumps, Factor, GridFunction, MaximalConfig};
use rough_sio::operators::{Operator, TestFunction};
use rough_sio::par;
use rough_sio::starset::StarSet;

fn modes() -> [(&'static str, bool); 2] {
    [("sequential", false), ("parallel", true)]
}

fn starlike_maximal(c: &mut Criterion) {
    let grid = GridFunction::centered(10.0, 33).unwrap();
    let f = random_bumps(&grid, 4, &mut ChaCha8Rng::seed_from_u64(7));
    let kernel = CatalogueKernel::SplitArcs.build(2, Resolution::circle(512)).unwrap();
    let star = StarSet::new(Arc::new(kernel));
    let cfg = MaximalConfig::for_grid(&f);
    let mut group = c.benchmark_group("m_sh_33x33");
    group.sample_size(10);
    for (name, on) in modes() {
        par::set_parallel(on);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| m_sh(&f, &star, &Factor::Unit, &cfg).unwrap())
        });
    }
    group.finish();
    par::set_parallel(true);
}

fn truncated_operator(c: &mut Criterion) {
    let kernel = CatalogueKernel::SplitArcs.build(2, Resolution::circle(512)).unwrap();
    let op = Operator::new(&KernelSpec::new(kernel, RadialFactor::new(RadialProfile::SaturatingRoot))).unwrap();
    let f = TestFunction::gaussian([0.2, -0.1], 0.8, 1.0).unwrap();
    let points: Vec<[f64; 2]> = (0..16).map(|i| [-1.5 + 0.2 * i as f64, 0.3]).collect();
    let mut group = c.benchmark_group("t_eps_16_points");
    group.sample_size(10);
    for (name, on) in modes() {
        par::set_parallel(on);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::map(&points, |&x| op.direct(&f, 0.25, x).unwrap().value))
        });
    }
    group.finish();
    par::set_parallel(true);
}

criterion_group!(benches, starlike_maximal, truncated_operator);
criterion_main!(benches);
