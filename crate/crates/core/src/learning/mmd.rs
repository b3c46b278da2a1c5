use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::kernels::{gram_with_jobs, GramMatrix, KernelConfig};
use crate::paths::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accept,
    Reject,
}

/// Result of a kernel two-sample test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdReport {
    pub mmd_sq: f64,
    /// Off-diagonal mean of the `X` block.
    pub mean_xx: f64,
    pub mean_xy: f64,
    /// Off-diagonal mean of the `Y` block.
    pub mean_yy: f64,
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub bound: f64,
    /// Absent when `m != n`: the threshold is only available for equal sizes.
    pub threshold: Option<f64>,
    pub decision: Option<Decision>,
    pub config_hash: String,
}

fn off_diagonal_mean(g: &GramMatrix) -> f64 {
    let m = g.rows();
    let mut s = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                s += g.get(i, j);
            }
        }
    }
    s / (m * (m - 1)) as f64
}

fn check_blocks(gxx: &GramMatrix, gxy: &GramMatrix, gyy: &GramMatrix) -> Result<(usize, usize)> {
    let (m, n) = (gxx.rows(), gyy.rows());
    if !gxx.is_square() || !gyy.is_square() || gxy.rows() != m || gxy.cols() != n {
        return Err(shape(format!(
            "inconsistent Gram blocks {}x{}, {}x{}, {}x{}",
            gxx.rows(),
            gxx.cols(),
            gxy.rows(),
            gxy.cols(),
            gyy.rows(),
            gyy.cols()
        )));
    }
    if m < 2 || n < 2 {
        return Err(Error::Precondition(format!(
            "the unbiased estimator needs at least two samples per side, got {m} and {n}"
        )));
    }
    if gxx.config_hash != gxy.config_hash || gxy.config_hash != gyy.config_hash {
        return Err(Error::Precondition(
            "Gram blocks come from different kernel configurations".into(),
        ));
    }
    Ok((m, n))
}

/// Unbiased estimate of the squared MMD; may be negative.
pub fn mmd_sq_unbiased(gxx: &GramMatrix, gxy: &GramMatrix, gyy: &GramMatrix) -> Result<f64> {
    check_blocks(gxx, gxy, gyy)?;
    Ok(off_diagonal_mean(gxx) + off_diagonal_mean(gyy) - 2.0 * gxy.mean())
}

/// Test of `H0: X ~ Y` with acceptance region `mmd_sq < 4M sqrt(log(1/alpha)/m)`.
///
/// `bound` is the kernel bound `M`; without one the largest Gram entry is
/// used, which requires `m = n`. With an explicit bound and `m != n` only
/// the statistic is reported.
pub fn mmd_test_from_grams(
    gxx: &GramMatrix,
    gxy: &GramMatrix,
    gyy: &GramMatrix,
    alpha: f64,
    bound: Option<f64>,
) -> Result<MmdReport> {
    let (m, n) = check_blocks(gxx, gxy, gyy)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if bound.is_none() && m != n {
        return Err(Error::Precondition(format!(
            "an automatic threshold needs equal sample sizes, got {m} and {n}; pass a kernel bound"
        )));
    }
    let bound = match bound {
        Some(b) if b > 0.0 && b.is_finite() => b,
        Some(b) => return Err(Error::Config(format!("kernel bound must be positive, got {b}"))),
        None => gxx.max_abs().max(gxy.max_abs()).max(gyy.max_abs()),
    };
    let (mean_xx, mean_yy, mean_xy) = (off_diagonal_mean(gxx), off_diagonal_mean(gyy), gxy.mean());
    let mmd_sq = mean_xx + mean_yy - 2.0 * mean_xy;
    let threshold =
        (m == n).then(|| 4.0 * bound / (m as f64).sqrt() * (1.0 / alpha).ln().sqrt());
    let decision = threshold.map(|t| {
        if mmd_sq >= t {
            Decision::Reject
        } else {
            Decision::Accept
        }
    });
    Ok(MmdReport {
        mmd_sq,
        mean_xx,
        mean_xy,
        mean_yy,
        m,
        n,
        alpha,
        bound,
        threshold,
        decision,
        config_hash: gxx.config_hash.clone(),
    })
}

pub fn two_sample_test(
    x: &[Path],
    y: &[Path],
    config: &KernelConfig,
    alpha: f64,
    bound: Option<f64>,
    jobs: Option<usize>,
) -> Result<MmdReport> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::Precondition(
            "two-sample testing needs at least two paths per sample".into(),
        ));
    }
    let gxx = gram_with_jobs(x, config, None, jobs)?;
    let gxy = gram_with_jobs(x, config, Some(y), jobs)?;
    let gyy = gram_with_jobs(y, config, None, jobs)?;
    mmd_test_from_grams(&gxx, &gxy, &gyy, alpha, bound)
}
