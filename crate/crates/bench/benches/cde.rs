use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sigkit::{solve, LinearVectorFields, Method, Partition, SolveOptions};
use sigkit_bench::brownian_paths;

fn solvers(c: &mut Criterion) {
    let x = &brownian_paths(1, 2, 256, 7)[0];
    let f = LinearVectorFields::rolling_ball();
    let y0 = [0.0, 0.0, 1.0];
    let mut group = c.benchmark_group("rolling_ball 256 segments");
    for (name, method, depth) in [
        ("euler", Method::Euler, 2),
        ("log_ode", Method::LogOde, 2),
        ("log_ode", Method::LogOde, 4),
    ] {
        let opts = SolveOptions::new(method, depth, Partition::Every(8));
        group.bench_with_input(BenchmarkId::new(name, depth), &opts, |b, o| {
            b.iter(|| solve(black_box(x), &f, &y0, o).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
