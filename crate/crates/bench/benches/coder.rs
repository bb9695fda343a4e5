use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use crdlab_core::coder::{decode, design_coder, encode, synthesize_ar1};
use crdlab_core::ArSourceModel;
use std::hint::black_box;

const SAMPLES: usize = 100_000;

fn codec(c: &mut Criterion) {
    let model = ArSourceModel::ar1(0.9, 0.19).unwrap();
    let cfg = design_coder(&model, 0.1, 7).unwrap();
    let x = synthesize_ar1(&model, SAMPLES, 7).unwrap();
    let enc = encode(&x, &cfg).unwrap();
    let mut g = c.benchmark_group("coder");
    g.throughput(Throughput::Elements(SAMPLES as u64));
    g.sample_size(20);
    g.bench_function("encode", |b| b.iter(|| encode(black_box(&x), &cfg).unwrap()));
    g.bench_function("decode", |b| b.iter(|| decode(black_box(&enc.bitstream), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, codec);
criterion_main!(benches);
