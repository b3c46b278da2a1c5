//! Statistics and regression on path data built on signature kernels and
//! signature features.

mod distribution;
mod mmd;
mod ridge;
mod sigreg;

pub use distribution::{brownian_fit_statistic, distribution_kernel, OuterFunction};
pub use mmd::{mmd_sq_unbiased, mmd_test_from_grams, two_sample_test, Decision, MmdReport};
pub use ridge::{kernel_ridge_fit, kernel_ridge_predict, RidgeModel};
pub use sigreg::{
    signature_features, sig_regression_fit, sig_regression_predict, Regularizer,
    SigRegressionModel, MAX_FEATURES,
};

use crate::error::{shape, Result};

/// Checks that `targets` is a non-empty `n x k` table.
pub(crate) fn target_shape(targets: &[Vec<f64>], n: usize) -> Result<usize> {
    if targets.len() != n {
        return Err(shape(format!("{} targets for {n} samples", targets.len())));
    }
    let k = targets.first().map_or(0, Vec::len);
    if k == 0 || targets.iter().any(|t| t.len() != k) {
        return Err(shape("targets must be non-empty rows of equal length"));
    }
    if targets.iter().flatten().any(|v| !v.is_finite()) {
        return Err(crate::error::invalid("targets contain non-finite values"));
    }
    Ok(k)
}
