use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use umom_bench::stable_points;
use umom_core::{ks_statistic, sample_stable, SeededStream, StableParams};

fn bench_stable_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_stable_100k");
    group.throughput(Throughput::Elements(100_000));
    for alpha in [1.0, 1.5, 2.0] {
        let params = StableParams::new(1.0, alpha).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(alpha), &params, |b, p| {
            b.iter(|| sample_stable(black_box(p), SeededStream::new(1, 0), 100_000));
        });
    }
    group.finish();
}

fn bench_ks(c: &mut Criterion) {
    let a = stable_points(100_000, 1.5);
    let b = stable_points(100_000, 1.2);
    c.bench_function("ks_statistic_100k", |bch| {
        bch.iter(|| ks_statistic(black_box(&a), black_box(&b)));
    });
}

criterion_group!(benches, bench_stable_sampling, bench_ks);
criterion_main!(benches);
