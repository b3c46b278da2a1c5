#![allow(dead_code)]

use proptest::prelude::*;
use sigkit::Path;

/// Piecewise-linear path through `points` at integer times.
pub fn path(points: Vec<Vec<f64>>) -> Path {
    Path::from_points(points).unwrap()
}

/// Paths with `dim` channels, `1..=max_segments` segments and coordinates in [-1, 1].
pub fn pl_path(dim: usize, max_segments: usize) -> impl Strategy<Value = Path> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 2..=max_segments + 1)
        .prop_map(path)
}

/// A dimension in `1..=max_dim` with one path of that dimension.
pub fn any_path(max_dim: usize, max_segments: usize) -> impl Strategy<Value = Path> {
    (1..=max_dim).prop_flat_map(move |d| pl_path(d, max_segments))
}

/// Two paths sharing a dimension.
pub fn path_pair(max_dim: usize, max_segments: usize) -> impl Strategy<Value = (Path, Path)> {
    (1..=max_dim).prop_flat_map(move |d| (pl_path(d, max_segments), pl_path(d, max_segments)))
}

/// `|a - b| <= rel * max(|a|, |b|) + abs`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// Proptest settings without the on-disk failure file.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases: n,
        failure_persistence: None,
        ..Default::default()
    }
}
