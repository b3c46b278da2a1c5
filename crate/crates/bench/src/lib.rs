//! Criterion benchmarks for `sigkit`; see `benches/`.

use sigkit::{sample_brownian, Path};

/// `n` Brownian paths in `R^dim` with `steps` segments each, seeded from `seed`.
pub fn brownian_paths(n: usize, dim: usize, steps: usize, seed: u64) -> Vec<Path> {
    (0..n as u64)
        .map(|i| {
            let ts = sample_brownian(dim, steps, 1.0 / steps as f64, seed + i, None).unwrap();
            Path::from_series(&ts, false, false).unwrap()
        })
        .collect()
}
