//! Exact signatures of piecewise-linear paths.
//!
//! The signature of a piecewise-linear path is the ordered product of the
//! tensor exponentials of its segment increments, so no quadrature is
//! involved; the only error is floating-point rounding.

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::tensor::{GroupLike, TruncatedTensor};

pub fn signature(path: &Path, depth: usize) -> Result<GroupLike> {
    let mut sig = GroupLike::unit(path.dim(), depth)?;
    for inc in path.increments() {
        sig.mul_exp_in_place(&inc)?;
    }
    Ok(sig)
}

/// Signature of the restriction of `path` to `[s, t]`.
pub fn signature_interval(path: &Path, s: f64, t: f64, depth: usize) -> Result<GroupLike> {
    let (a, b) = (path.start_time(), path.end_time());
    if !(a <= s && s <= t && t <= b) {
        return Err(Error::Domain(format!(
            "interval [{s}, {t}] outside the path domain [{a}, {b}]"
        )));
    }
    if s == t {
        return GroupLike::unit(path.dim(), depth);
    }
    signature(&path.restrict(s, t)?, depth)
}

/// `S(x)_{t_0, t_i}` for every breakpoint `t_i`, starting with the unit.
pub fn prefix_signatures(path: &Path, depth: usize) -> Result<Vec<GroupLike>> {
    let mut out = Vec::with_capacity(path.len());
    let mut sig = GroupLike::unit(path.dim(), depth)?;
    out.push(sig.clone());
    for inc in path.increments() {
        sig.mul_exp_in_place(&inc)?;
        out.push(sig.clone());
    }
    Ok(out)
}

/// Expected Stratonovich signature of standard `d`-dimensional Brownian
/// motion on `[0, 1]`: odd levels vanish and level `2n` is
/// `(1/2 sum_i e_i (x) e_i)^n / n!`.
pub fn expected_brownian_signature(dim: usize, depth: usize) -> Result<TruncatedTensor> {
    expected_brownian_signature_over(dim, depth, 1.0)
}

/// As [`expected_brownian_signature`] over `[0, horizon]`.
pub fn expected_brownian_signature_over(
    dim: usize,
    depth: usize,
    horizon: f64,
) -> Result<TruncatedTensor> {
    let mut generator = TruncatedTensor::zeros(dim, depth)?;
    if depth >= 2 {
        let level = generator.level_mut(2);
        for i in 0..dim {
            level[i * dim + i] = 0.5 * horizon;
        }
    }
    Ok(generator.exp()?.into_tensor())
}
