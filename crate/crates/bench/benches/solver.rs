use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crdlab_core::solver::{brute_force_irdf, finite_horizon_irdf, rd_sweep, SolverOptions};
use crdlab_core::ArSourceModel;
use std::hint::black_box;

fn finite_horizon(c: &mut Criterion) {
    let model = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let opts = SolverOptions::default();
    let mut g = c.benchmark_group("finite_horizon_irdf");
    g.sample_size(10);
    for n in [16usize, 64, 256] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| finite_horizon_irdf(&model, black_box(0.1), n, &opts).unwrap())
        });
    }
    g.finish();
}

fn brute(c: &mut Criterion) {
    let model = ArSourceModel::ar1(0.9, 0.19).unwrap();
    c.bench_function("brute_force_irdf n=3", |b| {
        b.iter(|| brute_force_irdf(&model, black_box(0.1), 3, 1e-3).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let model = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let opts = SolverOptions::default();
    let ds: Vec<f64> = (1..=8).map(|k| 0.05 * k as f64).collect();
    let mut g = c.benchmark_group("rd_sweep");
    g.sample_size(10);
    g.bench_function("8 points n=64", |b| b.iter(|| rd_sweep(&model, black_box(&ds), 64, &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, finite_horizon, brute, sweep);
criterion_main!(benches);
