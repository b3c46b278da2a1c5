use crate::error::{Error, Result};
use crate::paths::Path;
use crate::signature::signature;
use crate::tensor::weights::ln_factorial;
use crate::tensor::WeightSequence;

use super::check_same_dim;

const TAIL_CUTOFF: f64 = 1e-18;
const TAIL_MAX_TERMS: usize = 1_000_000;

/// `sum_{i <= N} phi(i) <S(x)^i, S(y)^i>`.
pub fn truncated_kernel(x: &Path, y: &Path, depth: usize, phi: &WeightSequence) -> Result<f64> {
    check_same_dim(x, y)?;
    let sx = signature(x, depth)?;
    let sy = signature(y, depth)?;
    sx.tensor().phi_inner(sy.tensor(), phi)
}

/// Upper bound on `|k_phi - k_phi^N|` for paths of lengths `lx` and `ly`:
/// `sum_{i > N} |phi(i)| (lx ly)^i / (i!)^2`.
///
/// Terms are summed in log space until they drop below `1e-18` while
/// decreasing; the remainder past that point is bounded geometrically and
/// added.
pub fn kernel_tail_bound(depth: usize, lx: f64, ly: f64, phi: &WeightSequence) -> Result<f64> {
    if !(lx >= 0.0 && ly >= 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(Error::Domain(format!(
            "path lengths must be finite and non-negative, got {lx} and {ly}"
        )));
    }
    if !phi.is_summable() {
        return Err(Error::Config(
            "the tail bound needs a weight sequence defined at every level".into(),
        ));
    }
    phi.validate()?;
    let c = lx * ly;
    if c == 0.0 {
        return Ok(0.0);
    }
    let ln_c = c.ln();
    let mut total = 0.0;
    let mut last: Option<f64> = None;
    for i in depth + 1..depth + 1 + TAIL_MAX_TERMS {
        let term = match phi.ln_abs_weight(i)? {
            Some(lw) => (lw + i as f64 * ln_c - 2.0 * ln_factorial(i)).exp(),
            None => 0.0,
        };
        total += term;
        if let Some(prev) = last {
            if term < TAIL_CUTOFF && term <= prev {
                let ratio = if prev > 0.0 { term / prev } else { 0.0 };
                if ratio < 1.0 {
                    return Ok(total + term * ratio / (1.0 - ratio));
                }
            }
        }
        last = Some(term);
    }
    Err(Error::Numerical(format!(
        "tail series did not fall below {TAIL_CUTOFF} within {TAIL_MAX_TERMS} terms"
    )))
}
