use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_laguerre;

/// Level weights `k -> phi(k)` for weighted inner products and kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum WeightSequence {
    /// `phi(k) = c` for every level.
    Constant { c: f64 },
    /// `phi(k) = E[pi^k]` for a random variable `pi`.
    Moments(MomentDistribution),
    /// Explicit values for levels `0..values.len()`.
    Table { values: Vec<f64> },
}

/// Random variables whose moment sequences serve as weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "kebab-case")]
pub enum MomentDistribution {
    /// `pi = theta` almost surely, so `phi(k) = theta^k`.
    PointMass { theta: f64 },
    /// `pi = sqrt(E)` with `E ~ Exp(1)`, so `phi(k) = Gamma(k/2 + 1) = (k/2)!`.
    SqrtExponential,
    /// `pi ~ Exp(rate)`, so `phi(k) = k! / rate^k`.
    Exponential { rate: f64 },
}

impl Default for WeightSequence {
    fn default() -> Self {
        WeightSequence::Constant { c: 1.0 }
    }
}

impl WeightSequence {
    pub fn constant(c: f64) -> Self {
        WeightSequence::Constant { c }
    }

    pub fn ones() -> Self {
        Self::constant(1.0)
    }

    pub fn table(values: Vec<f64>) -> Self {
        WeightSequence::Table { values }
    }

    pub fn moments(dist: MomentDistribution) -> Self {
        WeightSequence::Moments(dist)
    }

    /// `theta^k`.
    pub fn geometric(theta: f64) -> Self {
        WeightSequence::Moments(MomentDistribution::PointMass { theta })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSequence::Constant { c } if !c.is_finite() => {
                Err(Error::Config("constant weight must be finite".into()))
            }
            WeightSequence::Table { values } if values.iter().any(|v| !v.is_finite()) => {
                Err(Error::Config("weight table contains non-finite values".into()))
            }
            WeightSequence::Moments(m) => m.validate(),
            _ => Ok(()),
        }
    }

    pub fn weight(&self, k: usize) -> Result<f64> {
        match self {
            WeightSequence::Constant { c } => Ok(*c),
            WeightSequence::Moments(m) => Ok(m.moment(k)),
            WeightSequence::Table { values } => values.get(k).copied().ok_or_else(|| {
                Error::Config(format!(
                    "weight table covers levels 0..{} but level {k} was queried",
                    values.len()
                ))
            }),
        }
    }

    /// Weights for levels `0..=depth`.
    pub fn weights_up_to(&self, depth: usize) -> Result<Vec<f64>> {
        (0..=depth).map(|k| self.weight(k)).collect()
    }

    /// `ln |phi(k)|`, or `None` when `phi(k) = 0`.
    pub(crate) fn ln_abs_weight(&self, k: usize) -> Result<Option<f64>> {
        let w = match self {
            WeightSequence::Moments(MomentDistribution::SqrtExponential) => {
                return Ok(Some(ln_gamma_half_plus_one(k)));
            }
            WeightSequence::Moments(MomentDistribution::Exponential { rate }) => {
                return Ok(Some(ln_factorial(k) - k as f64 * rate.ln()));
            }
            other => other.weight(k)?,
        };
        Ok((w != 0.0).then(|| w.abs().ln()))
    }

    /// Whether `sum_k C^k |phi(k)| / (k!)^2` is known to converge for every
    /// `C > 0`. Tables only define finitely many levels, so their tail is
    /// unknown.
    pub fn is_summable(&self) -> bool {
        !matches!(self, WeightSequence::Table { .. })
    }

    /// `k -> phi(k + 1)`.
    pub fn shifted(&self) -> Result<WeightSequence> {
        match self {
            WeightSequence::Constant { .. } => Ok(self.clone()),
            WeightSequence::Table { values } if !values.is_empty() => {
                Ok(WeightSequence::table(values[1..].to_vec()))
            }
            _ => Err(Error::Unsupported(
                "shifted weights are only defined for constant and table kinds".into(),
            )),
        }
    }

    pub fn moment_distribution(&self) -> Option<&MomentDistribution> {
        match self {
            WeightSequence::Moments(m) => Some(m),
            _ => None,
        }
    }
}

impl MomentDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            MomentDistribution::PointMass { theta } if !theta.is_finite() => {
                Err(Error::Config("point mass location must be finite".into()))
            }
            MomentDistribution::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                Err(Error::Config("exponential rate must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// `E[pi^k]`.
    pub fn moment(&self, k: usize) -> f64 {
        match self {
            MomentDistribution::PointMass { theta } => theta.powi(k as i32),
            MomentDistribution::SqrtExponential => ln_gamma_half_plus_one(k).exp(),
            MomentDistribution::Exponential { rate } => {
                (ln_factorial(k) - k as f64 * rate.ln()).exp()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MomentDistribution::PointMass { theta } => *theta,
            MomentDistribution::SqrtExponential => {
                let e: f64 = Exp1.sample(rng);
                e.sqrt()
            }
            MomentDistribution::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
        }
    }

    /// Gaussian rule `(theta_j, w_j)` with `E[g(pi)] ~ sum_j w_j g(theta_j)`.
    pub fn quadrature(&self, nodes: usize) -> Result<Vec<(f64, f64)>> {
        match self {
            MomentDistribution::PointMass { theta } => Ok(vec![(*theta, 1.0)]),
            MomentDistribution::SqrtExponential => Ok(gauss_laguerre(nodes)?
                .into_iter()
                .map(|(x, w)| (x.sqrt(), w))
                .collect()),
            MomentDistribution::Exponential { rate } => Ok(gauss_laguerre(nodes)?
                .into_iter()
                .map(|(x, w)| (x / rate, w))
                .collect()),
        }
    }
}

pub(crate) fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln Gamma(k/2 + 1)` via `Gamma(z + 1) = z Gamma(z)` from `Gamma(1) = 1`
/// or `Gamma(3/2) = sqrt(pi)/2`.
pub(crate) fn ln_gamma_half_plus_one(k: usize) -> f64 {
    let (mut acc, mut z) = if k % 2 == 0 {
        (0.0, 1.0)
    } else {
        ((std::f64::consts::PI.sqrt() / 2.0).ln(), 1.5)
    };
    let target = k as f64 / 2.0 + 1.0;
    while z + 0.25 < target {
        acc += z.ln();
        z += 1.0;
    }
    acc
}
