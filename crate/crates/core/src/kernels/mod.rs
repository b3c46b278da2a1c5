//! Signature kernels: truncated inner products, the Goursat PDE scheme,
//! weighted kernels as averages of rescaled PDE solutions, and Gram
//! matrices.

mod gram;
mod pde;
mod truncated;
mod weighted;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::quadrature::MAX_LAGUERRE_NODES;
use crate::tensor::{check_shape, WeightSequence};

pub use gram::{gram, gram_with_jobs, GramMatrix};
pub use pde::{pde_kernel, pde_kernel_grid, PdeGrid, MAX_REFINEMENT};
pub use truncated::{kernel_tail_bound, truncated_kernel};
pub use weighted::{weighted_kernel_mc, weighted_kernel_quadrature, McEstimate};

pub const DEFAULT_REFINEMENT: u32 = 3;
pub const DEFAULT_QUADRATURE_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMethod {
    Truncated,
    Pde,
    WeightedMc,
    WeightedQuadrature,
}

impl std::str::FromStr for KernelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown kernel method {s:?}")))
    }
}

/// Which kernel to evaluate and with what discretisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub method: KernelMethod,
    /// Truncation depth for the truncated method.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Dyadic refinement of the PDE grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u32>,
    #[serde(default)]
    pub phi: WeightSequence,
    /// Monte Carlo draws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Quadrature nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl KernelConfig {
    pub fn truncated(depth: usize, phi: WeightSequence) -> Self {
        KernelConfig {
            method: KernelMethod::Truncated,
            depth: Some(depth),
            lambda: None,
            phi,
            samples: None,
            nodes: None,
            seed: None,
        }
    }

    pub fn pde(lambda: u32) -> Self {
        KernelConfig {
            method: KernelMethod::Pde,
            depth: None,
            lambda: Some(lambda),
            phi: WeightSequence::ones(),
            samples: None,
            nodes: None,
            seed: None,
        }
    }

    pub fn weighted_mc(phi: WeightSequence, samples: usize, seed: u64, lambda: u32) -> Self {
        KernelConfig {
            method: KernelMethod::WeightedMc,
            depth: None,
            lambda: Some(lambda),
            phi,
            samples: Some(samples),
            nodes: None,
            seed: Some(seed),
        }
    }

    pub fn weighted_quadrature(phi: WeightSequence, nodes: usize, lambda: u32) -> Self {
        KernelConfig {
            method: KernelMethod::WeightedQuadrature,
            depth: None,
            lambda: Some(lambda),
            phi,
            samples: None,
            nodes: Some(nodes),
            seed: None,
        }
    }

    /// Checks required fields and fills defaults, so equal kernels hash equal.
    pub fn resolved(&self) -> Result<KernelConfig> {
        self.phi.validate()?;
        let mut out = self.clone();
        let lambda_ok = |l: u32| {
            if l > MAX_REFINEMENT {
                Err(Error::Resource(format!(
                    "refinement {l} exceeds the grid guard {MAX_REFINEMENT}"
                )))
            } else {
                Ok(l)
            }
        };
        match self.method {
            KernelMethod::Truncated => {
                let n = self
                    .depth
                    .ok_or_else(|| Error::Config("the truncated method needs N".into()))?;
                check_shape(1, n)?;
                out.lambda = None;
                out.samples = None;
                out.nodes = None;
                out.seed = None;
            }
            KernelMethod::Pde => {
                if self.phi != WeightSequence::ones() {
                    return Err(Error::Config(
                        "the pde method solves the unweighted kernel; use a weighted method for other phi".into(),
                    ));
                }
                out.lambda = Some(lambda_ok(self.lambda.unwrap_or(DEFAULT_REFINEMENT))?);
                out.depth = None;
                out.samples = None;
                out.nodes = None;
                out.seed = None;
            }
            KernelMethod::WeightedMc => {
                moment_phi(&self.phi)?;
                let samples = self
                    .samples
                    .ok_or_else(|| Error::Config("the weighted-mc method needs samples".into()))?;
                if samples == 0 {
                    return Err(Error::Config("sample count must be at least 1".into()));
                }
                out.lambda = Some(lambda_ok(self.lambda.unwrap_or(DEFAULT_REFINEMENT))?);
                out.seed = Some(self.seed.unwrap_or(0));
                out.depth = None;
                out.nodes = None;
            }
            KernelMethod::WeightedQuadrature => {
                moment_phi(&self.phi)?;
                let nodes = self.nodes.unwrap_or(DEFAULT_QUADRATURE_NODES);
                if nodes == 0 || nodes > MAX_LAGUERRE_NODES {
                    return Err(Error::Config(format!(
                        "node count must lie in 1..={MAX_LAGUERRE_NODES}"
                    )));
                }
                out.nodes = Some(nodes);
                out.lambda = Some(lambda_ok(self.lambda.unwrap_or(DEFAULT_REFINEMENT))?);
                out.depth = None;
                out.samples = None;
                out.seed = None;
            }
        }
        Ok(out)
    }

    /// SHA-256 of the canonical JSON of the resolved config, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let json = serde_json::to_vec(&self.resolved()?)?;
        Ok(hex(&Sha256::digest(&json)))
    }

    /// `k(x, y)`. Monte Carlo draws use the configured seed.
    pub fn evaluate(&self, x: &Path, y: &Path) -> Result<f64> {
        let cfg = self.resolved()?;
        cfg.evaluate_resolved(x, y, cfg.seed.unwrap_or(0))
    }

    fn evaluate_resolved(&self, x: &Path, y: &Path, seed: u64) -> Result<f64> {
        let lambda = self.lambda.unwrap_or(DEFAULT_REFINEMENT);
        match self.method {
            KernelMethod::Truncated => truncated_kernel(x, y, self.depth.unwrap_or(0), &self.phi),
            KernelMethod::Pde => pde_kernel(x, y, lambda),
            KernelMethod::WeightedMc => Ok(weighted_kernel_mc(
                x,
                y,
                &self.phi,
                self.samples.unwrap_or(1),
                seed,
                lambda,
            )?
            .mean),
            KernelMethod::WeightedQuadrature => {
                let rule = moment_phi(&self.phi)?
                    .quadrature(self.nodes.unwrap_or(DEFAULT_QUADRATURE_NODES))?;
                weighted_kernel_quadrature(x, y, &rule, lambda)
            }
        }
    }
}

fn moment_phi(phi: &WeightSequence) -> Result<&crate::tensor::MomentDistribution> {
    phi.moment_distribution().ok_or_else(|| {
        Error::Config("weighted kernels need phi given as the moments of a distribution".into())
    })
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn check_same_dim(x: &Path, y: &Path) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(crate::error::shape(format!(
            "paths of dimension {} and {}",
            x.dim(),
            y.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::MomentDistribution;

    #[test]
    fn json_schema() {
        let cfg: KernelConfig = serde_json::from_str(
            r#"{"method":"weighted-mc","lambda":4,"phi":{"kind":"moments","params":{"distribution":"sqrt-exponential"}},"samples":100,"seed":7}"#,
        )
        .unwrap();
        assert_eq!(cfg.method, KernelMethod::WeightedMc);
        assert_eq!(
            cfg.phi,
            WeightSequence::moments(MomentDistribution::SqrtExponential)
        );
        let back: KernelConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<KernelConfig>(r#"{"method":"pde","bogus":1}"#).is_err());
    }

    #[test]
    fn required_fields_and_guards() {
        let mut t = KernelConfig::truncated(3, WeightSequence::ones());
        assert!(t.resolved().is_ok());
        t.depth = None;
        assert!(t.resolved().is_err());
        assert!(KernelConfig::pde(MAX_REFINEMENT + 1).resolved().is_err());
        let mut p = KernelConfig::pde(2);
        p.phi = WeightSequence::geometric(2.0);
        assert!(p.resolved().is_err());
        assert!(KernelConfig::weighted_mc(WeightSequence::ones(), 10, 0, 2)
            .resolved()
            .is_err());
        assert!(KernelConfig::weighted_mc(WeightSequence::geometric(0.5), 0, 0, 2)
            .resolved()
            .is_err());
        assert!(KernelConfig::weighted_quadrature(WeightSequence::geometric(0.5), 33, 2)
            .resolved()
            .is_err());
    }

    #[test]
    fn hash_ignores_irrelevant_fields_and_defaults() {
        let a = KernelConfig::pde(3);
        let mut b = a.clone();
        b.lambda = None;
        b.samples = Some(9);
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        assert_ne!(a.hash().unwrap(), KernelConfig::pde(4).hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }

    #[test]
    fn methods_parse_from_strings() {
        assert_eq!("pde".parse::<KernelMethod>().unwrap(), KernelMethod::Pde);
        assert_eq!(
            "weighted-quadrature".parse::<KernelMethod>().unwrap(),
            KernelMethod::WeightedQuadrature
        );
        assert!("spline".parse::<KernelMethod>().is_err());
    }
}
