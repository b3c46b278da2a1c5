use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sigkit::{log_signature, signature};
use sigkit_bench::brownian_paths;

fn signatures(c: &mut Criterion) {
    let mut group = c.benchmark_group("signature");
    for (dim, depth) in [(2, 4), (2, 8), (3, 6), (5, 4)] {
        let x = &brownian_paths(1, dim, 100, 1)[0];
        group.bench_with_input(BenchmarkId::new(format!("d{dim}"), depth), &depth, |b, &n| {
            b.iter(|| signature(black_box(x), n).unwrap())
        });
    }
    group.finish();
}

fn log_signatures(c: &mut Criterion) {
    let x = &brownian_paths(1, 3, 100, 2)[0];
    c.bench_function("log_signature d3 N4", |b| b.iter(|| log_signature(black_box(x), 4).unwrap()));
}

criterion_group!(benches, signatures, log_signatures);
criterion_main!(benches);
