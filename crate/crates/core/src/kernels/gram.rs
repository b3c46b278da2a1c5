use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::paths::Path;

use super::KernelConfig;

/// Matrix of pairwise kernel values tagged with the kernel that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub config_hash: String,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl GramMatrix {
    /// Wraps precomputed values; rows must share one length.
    pub fn new(values: Vec<Vec<f64>>, config_hash: impl Into<String>) -> Result<Self> {
        let cols = values.first().map_or(0, Vec::len);
        if values.iter().any(|r| r.len() != cols) {
            return Err(shape("ragged Gram matrix rows"));
        }
        let ids = |n: usize| (0..n).map(|i| i.to_string()).collect();
        Ok(GramMatrix {
            config_hash: config_hash.into(),
            row_ids: ids(values.len()),
            col_ids: ids(cols),
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.values.len()
    }

    pub fn cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows()).all(|i| (0..i).all(|j| self.values[i][j] == self.values[j][i]))
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows(), self.cols(), |i, j| self.values[i][j])
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Mean of all entries.
    pub fn mean(&self) -> f64 {
        let n = (self.rows() * self.cols()) as f64;
        self.values.iter().flatten().sum::<f64>() / n
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        if !self.is_square() || self.rows() == 0 {
            return Err(shape("eigenvalues need a non-empty square matrix"));
        }
        Ok(self.to_dmatrix().symmetric_eigen().eigenvalues.min())
    }

    /// Errors unless the smallest eigenvalue is at least `-1e-8` times the
    /// largest diagonal entry.
    pub fn check_psd(&self) -> Result<()> {
        let lo = self.min_eigenvalue()?;
        let diag = (0..self.rows()).map(|i| self.values[i][i]).fold(0.0, f64::max);
        if lo < -1e-8 * diag {
            return Err(Error::Conditioning(format!(
                "Gram matrix has eigenvalue {lo:e} below the tolerance -1e-8 x {diag:e}"
            )));
        }
        Ok(())
    }

    pub fn with_ids(mut self, row_ids: Vec<String>, col_ids: Vec<String>) -> Result<Self> {
        if row_ids.len() != self.rows() || col_ids.len() != self.cols() {
            return Err(shape(format!(
                "{} x {} ids for a {} x {} matrix",
                row_ids.len(),
                col_ids.len(),
                self.rows(),
                self.cols()
            )));
        }
        self.row_ids = row_ids;
        self.col_ids = col_ids;
        Ok(self)
    }
}

/// Gram matrix of `paths` against itself, or against `cross` when given.
/// Runs on the global rayon pool.
pub fn gram(paths: &[Path], config: &KernelConfig, cross: Option<&[Path]>) -> Result<GramMatrix> {
    gram_with_jobs(paths, config, cross, None)
}

/// As [`gram`], on a dedicated pool of `jobs` threads when given. The
/// result does not depend on the schedule.
pub fn gram_with_jobs(
    paths: &[Path],
    config: &KernelConfig,
    cross: Option<&[Path]>,
    jobs: Option<usize>,
) -> Result<GramMatrix> {
    let cfg = config.resolved()?;
    let hash = config.hash()?;
    let cols = cross.unwrap_or(paths);
    if let Some(p) = paths.iter().chain(cols).find(|p| p.dim() != paths[0].dim()) {
        return Err(shape(format!(
            "paths of dimension {} and {} in one Gram matrix",
            paths[0].dim(),
            p.dim()
        )));
    }
    let pairs: Vec<(usize, usize)> = match cross {
        None => (0..paths.len())
            .flat_map(|i| (i..paths.len()).map(move |j| (i, j)))
            .collect(),
        Some(c) => (0..paths.len())
            .flat_map(|i| (0..c.len()).map(move |j| (i, j)))
            .collect(),
    };
    let seed = cfg.seed.unwrap_or(0);
    let eval = || -> Vec<Result<f64>> {
        pairs
            .par_iter()
            .map(|&(i, j)| cfg.evaluate_resolved(&paths[i], &cols[j], pair_seed(seed, i, j)))
            .collect()
    };
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Resource(format!("thread pool: {e}")))?
            .install(eval),
        None => eval(),
    };
    let mut values = vec![vec![0.0; cols.len()]; paths.len()];
    for (&(i, j), r) in pairs.iter().zip(results) {
        let v = r.map_err(|e| Error::Pair {
            row: i,
            col: j,
            source: Box::new(e),
        })?;
        values[i][j] = v;
        if cross.is_none() {
            values[j][i] = v;
        }
    }
    let ids = |n: usize| (0..n).map(|i| i.to_string()).collect();
    Ok(GramMatrix {
        config_hash: hash,
        row_ids: ids(paths.len()),
        col_ids: ids(cols.len()),
        values,
    })
}

/// Per-pair stream seed, a SplitMix64 finaliser over `(seed, i, j)`.
fn pair_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut z = seed;
    for v in [i as u64, j as u64] {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(v);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::WeightSequence;

    fn sample_paths() -> Vec<Path> {
        (0..5)
            .map(|k| {
                let s = k as f64 * 0.3;
                Path::from_points(vec![
                    vec![0.0, 0.0],
                    vec![s.sin(), s.cos() * 0.5],
                    vec![0.2 - s, 0.4 * s],
                ])
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn single_path_and_symmetry() {
        let ps = sample_paths();
        let cfg = KernelConfig::truncated(4, WeightSequence::ones());
        let g1 = gram(&ps[..1], &cfg, None).unwrap();
        assert_eq!((g1.rows(), g1.cols()), (1, 1));
        let g = gram(&ps, &KernelConfig::pde(2), None).unwrap();
        assert!(g.is_symmetric());
        assert_eq!(g.config_hash, KernelConfig::pde(2).hash().unwrap());
        gram(&ps, &cfg, None).unwrap().check_psd().unwrap();
    }

    #[test]
    fn duplicated_paths_are_rank_deficient() {
        let mut ps = sample_paths();
        ps.push(ps[0].clone());
        let g = gram(&ps, &KernelConfig::truncated(3, WeightSequence::ones()), None).unwrap();
        assert!(g.min_eigenvalue().unwrap().abs() < 1e-10);
        g.check_psd().unwrap();
    }

    #[test]
    fn schedule_independent() {
        let ps = sample_paths();
        let cfg = KernelConfig::weighted_mc(WeightSequence::geometric(0.5), 20, 9, 2);
        let a = gram_with_jobs(&ps, &cfg, None, Some(1)).unwrap();
        let b = gram_with_jobs(&ps, &cfg, None, Some(4)).unwrap();
        assert_eq!(a, b);
        let c = gram_with_jobs(&ps[..2], &KernelConfig::pde(1), Some(&ps), Some(3)).unwrap();
        assert_eq!((c.rows(), c.cols()), (2, 5));
    }

    #[test]
    fn mixed_dimensions_fail() {
        let mut ps = sample_paths();
        ps.push(Path::from_points(vec![vec![0.0], vec![1.0]]).unwrap());
        assert!(gram(&ps, &KernelConfig::pde(1), None).is_err());
    }

    #[test]
    fn pair_errors_name_the_pair() {
        let ps = sample_paths();
        let cfg = KernelConfig::truncated(3, WeightSequence::table(vec![1.0, 1.0]));
        match gram(&ps, &cfg, None) {
            Err(Error::Pair { row: 0, col: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
