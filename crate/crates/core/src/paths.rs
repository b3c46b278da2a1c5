//! Piecewise-linear paths built from time series.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, shape, Error, Result};

/// Observations `(t_i, x_i)` with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    timestamps: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(shape(format!(
                "{} timestamps for {} observations",
                timestamps.len(),
                values.len()
            )));
        }
        if timestamps.len() < 2 {
            return Err(invalid("a time series needs at least two observations"));
        }
        check_increasing(&timestamps)?;
        let c = values[0].len();
        if c == 0 {
            return Err(invalid("observations must have at least one coordinate"));
        }
        for (i, v) in values.iter().enumerate() {
            if v.len() != c {
                return Err(shape(format!(
                    "observation {i} has {} coordinates, expected {c}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("observation {i} is not finite")));
            }
        }
        Ok(TimeSeries { timestamps, values })
    }

    /// Series indexed by `0, 1, ..., n`.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let ts = (0..values.len()).map(|i| i as f64).collect();
        Self::new(ts, values)
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

fn check_increasing(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("timestamps must be finite"));
    }
    if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(invalid(format!(
            "timestamps must be strictly increasing (t[{}] = {} >= t[{}] = {})",
            i,
            times[i],
            i + 1,
            times[i + 1]
        )));
    }
    Ok(())
}

/// Continuous piecewise-linear path through `nodes` at `times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    times: Vec<f64>,
    dim: usize,
    /// Row-major, one row of `dim` coordinates per breakpoint.
    nodes: Vec<f64>,
}

impl Path {
    pub fn new(times: Vec<f64>, nodes: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != nodes.len() {
            return Err(shape(format!(
                "{} breakpoints for {} nodes",
                times.len(),
                nodes.len()
            )));
        }
        if times.len() < 2 {
            return Err(invalid("a path needs at least two breakpoints"));
        }
        check_increasing(&times)?;
        let dim = nodes[0].len();
        if dim == 0 {
            return Err(invalid("path dimension must be positive"));
        }
        let mut flat = Vec::with_capacity(dim * nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.len() != dim {
                return Err(shape(format!("node {i} has dimension {}, expected {dim}", n.len())));
            }
            if n.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("node {i} is not finite")));
            }
            flat.extend_from_slice(n);
        }
        Ok(Path {
            times,
            dim,
            nodes: flat,
        })
    }

    /// Nodes at times `0, 1, ..., n`.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let times = (0..points.len()).map(|i| i as f64).collect();
        Self::new(times, points)
    }

    /// Linear path from `start` to `end` on `[t0, t1]`.
    pub fn linear(start: &[f64], end: &[f64], t0: f64, t1: f64) -> Result<Self> {
        Self::new(vec![t0, t1], vec![start.to_vec(), end.to_vec()])
    }

    /// Interpolates a series, optionally prepending time as the first
    /// coordinate and translating to start at the origin.
    pub fn from_series(ts: &TimeSeries, time_augment: bool, basepoint: bool) -> Result<Self> {
        let nodes: Vec<Vec<f64>> = ts
            .values
            .iter()
            .zip(&ts.timestamps)
            .map(|(v, &t)| {
                let mut row = Vec::with_capacity(v.len() + 1);
                if time_augment {
                    row.push(t);
                }
                row.extend_from_slice(v);
                row
            })
            .collect();
        let path = Path::new(ts.timestamps.clone(), nodes)?;
        Ok(if basepoint { path.basepointed() } else { path })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of breakpoints.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn segments(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("paths have breakpoints")
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn start(&self) -> &[f64] {
        self.node(0)
    }

    pub fn end(&self) -> &[f64] {
        self.node(self.len() - 1)
    }

    /// Increment over segment `i`.
    pub fn increment(&self, i: usize) -> Vec<f64> {
        let (a, b) = (self.node(i), self.node(i + 1));
        b.iter().zip(a).map(|(y, x)| y - x).collect()
    }

    pub fn increments(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.segments()).map(move |i| self.increment(i))
    }

    /// Linear interpolant at `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (a, b) = (self.start_time(), self.end_time());
        if !(a..=b).contains(&t) {
            return Err(Error::Domain(format!("time {t} outside [{a}, {b}]")));
        }
        let i = self.segment_at(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = (t - t0) / (t1 - t0);
        let (x0, x1) = (self.node(i), self.node(i + 1));
        Ok(x0.iter().zip(x1).map(|(p, q)| p + w * (q - p)).collect())
    }

    /// Index of the segment containing `t` (the last one at the end time).
    fn segment_at(&self, t: f64) -> usize {
        let idx = self.times.partition_point(|&s| s <= t);
        idx.clamp(1, self.segments()) - 1
    }

    pub fn translate(&self, offset: &[f64]) -> Path {
        let mut out = self.clone();
        for row in out.nodes.chunks_exact_mut(self.dim) {
            row.iter_mut().zip(offset).for_each(|(x, o)| *x += o);
        }
        out
    }

    pub fn basepointed(&self) -> Path {
        let neg: Vec<f64> = self.start().iter().map(|x| -x).collect();
        self.translate(&neg)
    }

    /// `x * y`: `y` translated to start at `x`'s end point, its domain
    /// re-based to start at `x`'s end time.
    pub fn concat(&self, other: &Path) -> Result<Path> {
        if self.dim != other.dim {
            return Err(shape(format!(
                "cannot concatenate paths of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        let shift_t = self.end_time() - other.start_time();
        let offset: Vec<f64> = self
            .end()
            .iter()
            .zip(other.start())
            .map(|(a, b)| a - b)
            .collect();
        let mut times = self.times.clone();
        let mut nodes = self.nodes.clone();
        for i in 1..other.len() {
            times.push(other.times[i] + shift_t);
            nodes.extend(other.node(i).iter().zip(&offset).map(|(x, o)| x + o));
        }
        check_increasing(&times)?;
        Ok(Path {
            times,
            dim: self.dim,
            nodes,
        })
    }

    /// Time reversal: breakpoints reflected about the midpoint of the domain.
    pub fn reverse(&self) -> Path {
        let (a, b) = (self.start_time(), self.end_time());
        let times = self.times.iter().rev().map(|t| a + b - t).collect();
        let nodes = self
            .nodes
            .chunks_exact(self.dim)
            .rev()
            .flatten()
            .copied()
            .collect();
        Path {
            times,
            dim: self.dim,
            nodes,
        }
    }

    /// Length of the path, which is its 1-variation.
    pub fn one_variation(&self) -> f64 {
        self.increments()
            .map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt())
            .sum()
    }

    /// Same nodes on new breakpoint times.
    pub fn reparameterize_nodes(&self, new_times: Vec<f64>) -> Result<Path> {
        if new_times.len() != self.times.len() {
            return Err(shape(format!(
                "{} new times for {} breakpoints",
                new_times.len(),
                self.times.len()
            )));
        }
        check_increasing(&new_times)?;
        Ok(Path {
            times: new_times,
            dim: self.dim,
            nodes: self.nodes.clone(),
        })
    }

    /// Pointwise multiplication of the nodes by `theta`.
    pub fn rescale(&self, theta: f64) -> Path {
        let mut out = self.clone();
        out.nodes.iter_mut().for_each(|x| *x *= theta);
        out
    }

    /// Restriction to `[s, t]`, splitting segments exactly at the endpoints.
    pub fn restrict(&self, s: f64, t: f64) -> Result<Path> {
        let (a, b) = (self.start_time(), self.end_time());
        if !(a <= s && s < t && t <= b) {
            return Err(Error::Domain(format!(
                "interval [{s}, {t}] not a nondegenerate subinterval of [{a}, {b}]"
            )));
        }
        let mut times = vec![s];
        let mut nodes = self.eval(s)?;
        for (i, &ti) in self.times.iter().enumerate() {
            if ti > s && ti < t {
                times.push(ti);
                nodes.extend_from_slice(self.node(i));
            }
        }
        times.push(t);
        nodes.extend(self.eval(t)?);
        Ok(Path {
            times,
            dim: self.dim,
            nodes,
        })
    }

    /// Sub-path through breakpoints `from..=to`.
    pub fn slice(&self, from: usize, to: usize) -> Result<Path> {
        if from >= to || to >= self.len() {
            return Err(Error::Domain(format!(
                "breakpoint range {from}..={to} invalid for {} breakpoints",
                self.len()
            )));
        }
        Ok(Path {
            times: self.times[from..=to].to_vec(),
            dim: self.dim,
            nodes: self.nodes[from * self.dim..(to + 1) * self.dim].to_vec(),
        })
    }
}

/// Piecewise-linear Brownian motion on the grid `0, h, 2h, ..., n h`,
/// starting at the origin.
///
/// Increments are i.i.d. `N(0, h Sigma)` with `Sigma` the identity, or for
/// `d = 2` the correlation matrix with off-diagonal `rho`. Deterministic in
/// `seed`; the generator is ChaCha8.
pub fn sample_brownian(
    dim: usize,
    n_steps: usize,
    step: f64,
    seed: u64,
    rho: Option<f64>,
) -> Result<TimeSeries> {
    if dim == 0 || n_steps == 0 {
        return Err(invalid("Brownian sampling needs dim >= 1 and n_steps >= 1"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("step size must be positive, got {step}")));
    }
    if let Some(r) = rho {
        if dim != 2 {
            return Err(invalid("a correlation is only supported for d = 2"));
        }
        if !(r > -1.0 && r < 1.0) {
            return Err(invalid(format!("correlation must lie in (-1, 1), got {r}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = step.sqrt();
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut current = vec![0.0; dim];
    values.push(current.clone());
    let mut z = vec![0.0; dim];
    for _ in 0..n_steps {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        if let Some(r) = rho {
            z[1] = r * z[0] + (1.0 - r * r).sqrt() * z[1];
        }
        current.iter_mut().zip(&z).for_each(|(c, zi)| *c += sd * zi);
        values.push(current.clone());
    }
    let timestamps = (0..=n_steps).map(|k| k as f64 * step).collect();
    TimeSeries::new(timestamps, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zigzag() -> Path {
        Path::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap()
    }

    #[test]
    fn time_augmentation() {
        let ts = TimeSeries::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]).unwrap();
        let p = Path::from_series(&ts, true, false).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.node(0), &[0.0, 0.0]);
        assert_eq!(p.node(1), &[1.0, 1.0]);
    }

    #[test]
    fn basepoint_on_constant_series() {
        let ts = TimeSeries::new(vec![0.0, 1.0, 2.0], vec![vec![3.0, -1.0]; 3]).unwrap();
        let p = Path::from_series(&ts, false, true).unwrap();
        assert!(p.nodes().all(|n| n == [0.0, 0.0]));
    }

    #[test]
    fn augment_and_basepoint_keep_increments() {
        let ts = TimeSeries::new(
            vec![0.5, 1.0, 3.0],
            vec![vec![2.0], vec![-1.0], vec![4.0]],
        )
        .unwrap();
        let p = Path::from_series(&ts, true, true).unwrap();
        assert_eq!(p.start(), &[0.0, 0.0]);
        assert_eq!(p.increment(0), vec![0.5, -3.0]);
        assert_eq!(p.increment(1), vec![2.0, 5.0]);
    }

    #[test]
    fn from_series_round_trips_nodes() {
        let values = vec![vec![0.1, 0.2], vec![0.3, -0.7], vec![1.5, 2.5]];
        let ts = TimeSeries::new(vec![0.0, 0.4, 1.1], values.clone()).unwrap();
        let p = Path::from_series(&ts, false, false).unwrap();
        for (i, v) in values.iter().enumerate() {
            assert_eq!(p.node(i), v.as_slice());
        }
    }

    #[test]
    fn rejects_duplicate_timestamps() {
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(Path::new(vec![1.0, 0.5], vec![vec![0.0], vec![1.0]]).is_err());
        assert!(TimeSeries::new(vec![0.0], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn repeated_nodes_are_allowed() {
        let p = Path::from_points(vec![vec![1.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(p.one_variation(), 1.0);
    }

    #[test]
    fn concat_rebases_domain_and_values() {
        let x = Path::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]).unwrap();
        let y = Path::new(vec![5.0, 7.0], vec![vec![10.0], vec![12.0]]).unwrap();
        let z = x.concat(&y).unwrap();
        assert_eq!(z.times(), &[0.0, 1.0, 3.0]);
        assert_eq!(z.end(), &[3.0]);

        let c = Path::new(vec![0.0, 1.0], vec![vec![4.0], vec![4.0]]).unwrap();
        let xc = x.concat(&c).unwrap();
        assert_eq!(xc.len(), 3);
        assert_eq!(xc.end(), x.end());

        let w = Path::from_points(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(x.concat(&w).is_err());
    }

    #[test]
    fn reverse_examples() {
        let p = Path::new(vec![0.0, 0.25, 1.0], vec![vec![0.0], vec![2.0], vec![1.0]]).unwrap();
        let r = p.reverse();
        assert_eq!(r.times(), &[0.0, 0.75, 1.0]);
        assert_eq!(r.node(0), &[1.0]);
        assert_eq!(r.reverse(), p);

        let l = Path::linear(&[0.0, 0.0], &[1.0, 2.0], 0.0, 1.0).unwrap().reverse();
        assert_eq!(l.start(), &[1.0, 2.0]);
        assert_eq!(l.end(), &[0.0, 0.0]);
    }

    #[test]
    fn one_variation_examples() {
        let l = Path::linear(&[0.0, 0.0], &[3.0, 4.0], 0.0, 1.0).unwrap();
        assert_eq!(l.one_variation(), 5.0);
        assert_eq!(zigzag().one_variation(), 2.0);
        let c = Path::from_points(vec![vec![1.0, 1.0]; 4]).unwrap();
        assert_eq!(c.one_variation(), 0.0);
        assert_eq!(l.rescale(-2.0).one_variation(), 10.0);
    }

    #[test]
    fn eval_and_restrict() {
        let p = zigzag();
        assert_eq!(p.eval(0.5).unwrap(), vec![0.5, 0.0]);
        assert_eq!(p.eval(2.0).unwrap(), vec![0.0, 0.0]);
        assert!(p.eval(2.5).is_err());
        let r = p.restrict(0.5, 1.5).unwrap();
        assert_eq!(r.times(), &[0.5, 1.0, 1.5]);
        assert_eq!(r.node(2), &[0.5, 0.0]);
        assert!(p.restrict(1.0, 1.0).is_err());
    }

    #[test]
    fn reparameterize_validates() {
        let p = zigzag();
        assert!(p.reparameterize_nodes(vec![0.0, 1.0]).is_err());
        assert!(p.reparameterize_nodes(vec![0.0, 2.0, 1.0]).is_err());
        let q = p.reparameterize_nodes(vec![0.0, 0.1, 5.0]).unwrap();
        assert_eq!(q.increment(1), p.increment(1));
    }

    #[test]
    fn brownian_is_reproducible() {
        let a = sample_brownian(2, 50, 0.01, 42, None).unwrap();
        let b = sample_brownian(2, 50, 0.01, 42, None).unwrap();
        assert_eq!(a, b);
        let c = sample_brownian(2, 50, 0.01, 43, None).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.values()[0], vec![0.0, 0.0]);
        assert!((a.timestamps()[50] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn brownian_rejects_bad_arguments() {
        assert!(sample_brownian(2, 10, 0.1, 0, Some(1.0)).is_err());
        assert!(sample_brownian(3, 10, 0.1, 0, Some(0.5)).is_err());
        assert!(sample_brownian(2, 0, 0.1, 0, None).is_err());
        assert!(sample_brownian(2, 10, -0.1, 0, None).is_err());
    }

    /// Increment variance and cross-covariance over 10^5 draws, checked at
    /// five standard errors.
    #[test]
    fn brownian_increment_moments() {
        let n = 100_000;
        let h = 0.01;
        for rho in [None, Some(0.0), Some(0.6)] {
            let ts = sample_brownian(2, n, h, 7, rho).unwrap();
            let p = Path::from_series(&ts, false, false).unwrap();
            let incs: Vec<Vec<f64>> = p.increments().collect();
            let var0 = incs.iter().map(|d| d[0] * d[0]).sum::<f64>() / n as f64;
            let cov = incs.iter().map(|d| d[0] * d[1]).sum::<f64>() / n as f64;
            // Var(X^2) = 2 h^2 for Gaussian X; Var(XY) = h^2 (1 + rho^2)
            let se_var = (2.0 * h * h / n as f64).sqrt();
            assert!((var0 - h).abs() < 5.0 * se_var, "{var0}");
            let r = rho.unwrap_or(0.0);
            let se_cov = (h * h * (1.0 + r * r) / n as f64).sqrt();
            assert!((cov - r * h).abs() < 5.0 * se_cov, "rho={r}: {cov}");
        }
    }
}
