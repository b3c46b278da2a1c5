use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::paths::Path;
use crate::signature::signature;
use crate::tensor::check_shape;

use super::target_shape;

/// Largest accepted feature dimension `1 + d + ... + d^N`.
pub const MAX_FEATURES: usize = 5000;
const PINV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regularizer {
    None,
    /// Penalty `lambda^2 ||omega||^2`.
    Tikhonov { lambda: f64 },
    Lasso { lambda: f64 },
}

/// Linear model on flattened truncated signatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigRegressionModel {
    pub dim: usize,
    pub depth: usize,
    pub regularizer: Regularizer,
    /// `M x k` weights, one column per target component.
    pub weights: Vec<Vec<f64>>,
    /// Root mean squared training error.
    pub train_rmse: f64,
}

impl SigRegressionModel {
    pub fn feature_len(&self) -> usize {
        self.weights.len()
    }
}

/// `M x n` matrix whose columns are the flattened depth-`N` signatures.
pub fn signature_features(paths: &[Path], depth: usize) -> Result<DMatrix<f64>> {
    let first = paths
        .first()
        .ok_or_else(|| Error::Precondition("at least one path is required".into()))?;
    let dim = first.dim();
    check_shape(dim, depth)?;
    let m: usize = (0..=depth).map(|k| dim.pow(k as u32)).sum();
    if m > MAX_FEATURES {
        return Err(Error::Resource(format!(
            "{m} signature features exceed the cap of {MAX_FEATURES}"
        )));
    }
    let mut g = DMatrix::zeros(m, paths.len());
    for (j, p) in paths.iter().enumerate() {
        if p.dim() != dim {
            return Err(shape(format!("paths of dimension {dim} and {}", p.dim())));
        }
        let flat = signature(p, depth)?.into_tensor().flatten();
        g.column_mut(j).copy_from_slice(&flat);
    }
    Ok(g)
}

/// Least squares on signature features. Without regularisation this is the
/// minimum-norm solution; with Tikhonov it is
/// `omega = (G G^T + lambda^2 I)^{-1} G y`.
pub fn sig_regression_fit(
    paths: &[Path],
    targets: &[Vec<f64>],
    depth: usize,
    regularizer: Regularizer,
) -> Result<SigRegressionModel> {
    let g = signature_features(paths, depth)?;
    let n = paths.len();
    let width = target_shape(targets, n)?;
    let y = DMatrix::from_fn(n, width, |i, j| targets[i][j]);
    let omega = match regularizer {
        Regularizer::None => {
            let svd = g.transpose().svd(true, true);
            let cutoff = PINV_CUTOFF * svd.singular_values.max();
            svd.solve(&y, cutoff)
                .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?
        }
        Regularizer::Tikhonov { lambda } => {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
            }
            let mut a = &g * g.transpose();
            for i in 0..a.nrows() {
                a[(i, i)] += lambda * lambda;
            }
            a.cholesky()
                .ok_or_else(|| Error::Conditioning("regularised normal equations are not positive definite".into()))?
                .solve(&(&g * &y))
        }
        Regularizer::Lasso { .. } => {
            return Err(Error::NotImplemented("LASSO signature regression".into()))
        }
    };
    let resid = g.transpose() * &omega - &y;
    Ok(SigRegressionModel {
        dim: paths[0].dim(),
        depth,
        regularizer,
        weights: (0..omega.nrows())
            .map(|i| omega.row(i).iter().copied().collect())
            .collect(),
        train_rmse: (resid.norm_squared() / (n * width) as f64).sqrt(),
    })
}

pub fn sig_regression_predict(model: &SigRegressionModel, paths: &[Path]) -> Result<Vec<Vec<f64>>> {
    if let Some(p) = paths.iter().find(|p| p.dim() != model.dim) {
        return Err(shape(format!(
            "model expects dimension {} but a path has {}",
            model.dim,
            p.dim()
        )));
    }
    if paths.is_empty() {
        return Ok(Vec::new());
    }
    let g = signature_features(paths, model.depth)?;
    let width = model.weights.first().map_or(0, Vec::len);
    let omega = DMatrix::from_fn(model.weights.len(), width, |i, j| model.weights[i][j]);
    let pred = g.transpose() * omega;
    Ok((0..pred.nrows())
        .map(|i| pred.row(i).iter().copied().collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_paths(n: usize, dim: usize, seed: u64) -> Vec<Path> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                Path::from_points(
                    (0..4)
                        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn feature_length() {
        let g = signature_features(&random_paths(3, 3, 1), 3).unwrap();
        assert_eq!(g.shape(), (1 + 3 + 9 + 27, 3));
        assert!(signature_features(&[], 2).is_err());
        assert!(signature_features(&random_paths(1, 10, 1), 4).is_err());
    }

    #[test]
    fn constant_targets() {
        let consts: Vec<Path> = (0..3)
            .map(|i| Path::from_points(vec![vec![i as f64, 0.0]; 2]).unwrap())
            .collect();
        let y = vec![vec![2.5]; 3];
        let m = sig_regression_fit(&consts, &y, 2, Regularizer::None).unwrap();
        assert!((m.weights[0][0] - 2.5).abs() < 1e-12);
        assert!(m.weights[1..].iter().all(|w| w[0].abs() < 1e-12));
        let ps = random_paths(10, 2, 3);
        let m = sig_regression_fit(&ps, &vec![vec![2.5]; 10], 2, Regularizer::None).unwrap();
        assert!(m.train_rmse < 1e-10);
        let pred = sig_regression_predict(&m, &ps).unwrap();
        assert!(pred.iter().all(|p| (p[0] - 2.5).abs() < 1e-10));
    }

    #[test]
    fn recovers_linear_functionals() {
        let ps = random_paths(30, 2, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ell: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<Vec<f64>> = ps
            .iter()
            .map(|p| {
                let f = signature(p, 2).unwrap().into_tensor().flatten();
                vec![f.iter().zip(&ell).map(|(a, b)| a * b).sum()]
            })
            .collect();
        let m = sig_regression_fit(&ps, &y, 2, Regularizer::None).unwrap();
        assert!(m.train_rmse < 1e-8);
        for (w, l) in m.weights.iter().zip(&ell) {
            assert!((w[0] - l).abs() < 1e-8);
        }
    }

    #[test]
    fn tikhonov_shrinks_and_lasso_is_absent() {
        let ps = random_paths(8, 2, 5);
        let y: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let norm = |m: &SigRegressionModel| m.weights.iter().map(|w| w[0] * w[0]).sum::<f64>();
        let a = sig_regression_fit(&ps, &y, 2, Regularizer::Tikhonov { lambda: 0.1 }).unwrap();
        let b = sig_regression_fit(&ps, &y, 2, Regularizer::Tikhonov { lambda: 1e4 }).unwrap();
        assert!(norm(&b) < 1e-6 && norm(&b) < norm(&a));
        let err = sig_regression_fit(&ps, &y, 2, Regularizer::Lasso { lambda: 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NotImplemented(_)));
    }
}
