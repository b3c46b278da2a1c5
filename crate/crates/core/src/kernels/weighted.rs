use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::tensor::WeightSequence;

use super::pde::IncrementGram;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// `None` with a single draw.
    pub std_error: Option<f64>,
    pub samples: usize,
}

/// `E[k(pi x, y)]` estimated from `samples` draws of `pi`, where `phi` is
/// the moment sequence of `pi`. Deterministic in `seed`.
pub fn weighted_kernel_mc(
    x: &Path,
    y: &Path,
    phi: &WeightSequence,
    samples: usize,
    seed: u64,
    lambda: u32,
) -> Result<McEstimate> {
    let dist = phi.moment_distribution().ok_or_else(|| {
        Error::Config("Monte Carlo weighting needs phi given as moments of a distribution".into())
    })?;
    dist.validate()?;
    if samples == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let inc = IncrementGram::new(x, y, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<f64> = (0..samples).map(|_| dist.sample(&mut rng)).collect();
    let values: Vec<f64> = thetas.par_iter().map(|&t| inc.solve(t)).collect();
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_error = (samples > 1).then(|| {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    });
    Ok(McEstimate {
        mean,
        std_error,
        samples,
    })
}

/// `sum_j w_j k(theta_j x, y)` for a rule `[(theta_j, w_j)]`.
pub fn weighted_kernel_quadrature(
    x: &Path,
    y: &Path,
    rule: &[(f64, f64)],
    lambda: u32,
) -> Result<f64> {
    if rule.is_empty() {
        return Err(Error::Config("quadrature rule has no nodes".into()));
    }
    if rule.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
        return Err(Error::Config("quadrature rule has non-finite entries".into()));
    }
    let inc = IncrementGram::new(x, y, lambda)?;
    Ok(rule.iter().map(|&(t, w)| w * inc.solve(t)).sum())
}
