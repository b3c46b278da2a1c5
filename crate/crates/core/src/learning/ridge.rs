use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::kernels::GramMatrix;

use super::target_shape;

const MAX_REFINEMENT_STEPS: usize = 3;
const RESIDUAL_TOL: f64 = 1e-8;

/// Dual solution of kernel ridge regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub train_ids: Vec<String>,
    /// `n x k` dual coefficients, one column per target component.
    pub alpha: Vec<Vec<f64>>,
    pub lambda: f64,
    /// Extra diagonal shift added on top of `n lambda`.
    pub jitter: f64,
    pub config_hash: String,
    /// `||(K + (n lambda + jitter) I) alpha - y|| / ||y||` after the solve.
    pub residual: f64,
}

/// Solves `(K + n lambda I + jitter I) alpha = y` by Cholesky with a few
/// rounds of iterative refinement.
pub fn kernel_ridge_fit(
    k: &GramMatrix,
    targets: &[Vec<f64>],
    lambda: f64,
    jitter: f64,
) -> Result<RidgeModel> {
    if !k.is_square() || k.rows() == 0 {
        return Err(shape("kernel ridge needs a non-empty square Gram matrix"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
    }
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(Error::Config(format!("jitter must be non-negative, got {jitter}")));
    }
    let n = k.rows();
    let width = target_shape(targets, n)?;
    let shift = n as f64 * lambda + jitter;
    let mut a = k.to_dmatrix();
    for i in 0..n {
        a[(i, i)] += shift;
    }
    let y = DMatrix::from_fn(n, width, |i, j| targets[i][j]);
    let chol = a.clone().cholesky().ok_or_else(|| {
        Error::Conditioning(format!(
            "K + {shift:e} I is not numerically positive definite; increase lambda or the jitter"
        ))
    })?;
    let mut alpha = chol.solve(&y);
    let y_norm = y.norm().max(f64::MIN_POSITIVE);
    let mut residual = (&a * &alpha - &y).norm() / y_norm;
    for _ in 0..MAX_REFINEMENT_STEPS {
        if residual <= RESIDUAL_TOL * 1e-3 {
            break;
        }
        let r = &y - &a * &alpha;
        let candidate = &alpha + chol.solve(&r);
        let res = (&a * &candidate - &y).norm() / y_norm;
        if res >= residual {
            break;
        }
        alpha = candidate;
        residual = res;
    }
    if !residual.is_finite() || residual > RESIDUAL_TOL {
        return Err(Error::Conditioning(format!(
            "ridge system solved only to relative residual {residual:e}; increase lambda or the jitter"
        )));
    }
    Ok(RidgeModel {
        train_ids: k.row_ids.clone(),
        alpha: (0..n).map(|i| alpha.row(i).iter().copied().collect()).collect(),
        lambda,
        jitter,
        config_hash: k.config_hash.clone(),
        residual,
    })
}

/// `K_cross alpha`, with `K_cross` of shape `(new paths) x (training paths)`.
pub fn kernel_ridge_predict(model: &RidgeModel, k_cross: &GramMatrix) -> Result<Vec<Vec<f64>>> {
    if k_cross.cols() != model.alpha.len() {
        return Err(shape(format!(
            "cross Gram has {} columns for {} training paths",
            k_cross.cols(),
            model.alpha.len()
        )));
    }
    if k_cross.config_hash != model.config_hash {
        return Err(Error::Precondition(
            "cross Gram and model come from different kernel configurations".into(),
        ));
    }
    let width = model.alpha.first().map_or(0, Vec::len);
    Ok((0..k_cross.rows())
        .map(|i| {
            (0..width)
                .map(|c| {
                    model
                        .alpha
                        .iter()
                        .enumerate()
                        .map(|(j, a)| k_cross.get(i, j) * a[c])
                        .sum()
                })
                .collect()
        })
        .collect())
}
