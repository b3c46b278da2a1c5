use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::kernels::{gram, KernelConfig};
use crate::paths::Path;
use crate::signature::{expected_brownian_signature, signature};
use crate::tensor::WeightSequence;

/// Outer function applied to kernel mean embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OuterFunction {
    /// `exp(<M_A, M_B>)`.
    Exp,
    /// `exp(-||M_A - M_B||^2 / sigma^2)`.
    Gaussian { sigma: f64 },
}

/// Kernel between two groups of paths through their empirical kernel mean
/// embeddings, with inner products taken as Gram-block means.
pub fn distribution_kernel(
    a: &[Path],
    b: &[Path],
    config: &KernelConfig,
    f: &OuterFunction,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("distribution kernels need non-empty groups".into()));
    }
    let ab = gram(a, config, Some(b))?.mean();
    match *f {
        OuterFunction::Exp => Ok(ab.exp()),
        OuterFunction::Gaussian { sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
            }
            let aa = gram(a, config, None)?.mean();
            let bb = gram(b, config, None)?.mean();
            let d2 = (aa + bb - 2.0 * ab).max(0.0);
            Ok((-d2 / (sigma * sigma)).exp())
        }
    }
}

/// `<E[S(B)], S(y)>_phi` at depth `N`, with `B` standard Brownian motion in
/// `R^dim` on `[0, 1]`.
pub fn brownian_fit_statistic(
    y: &Path,
    dim: usize,
    depth: usize,
    phi: &WeightSequence,
) -> Result<f64> {
    if y.dim() != dim {
        return Err(shape(format!(
            "path of dimension {} tested against {dim}-dimensional Brownian motion",
            y.dim()
        )));
    }
    let expected = expected_brownian_signature(dim, depth)?;
    expected.phi_inner(signature(y, depth)?.tensor(), phi)
}
