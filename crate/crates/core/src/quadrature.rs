//! Gauss-Laguerre quadrature for integrals against `e^{-x}` on `[0, inf)`.

use crate::error::{Error, Result};

pub const MAX_LAGUERRE_NODES: usize = 32;

/// Nodes and weights `(x_j, w_j)` of the `n`-point rule, nodes ascending.
/// Exact for polynomials of degree `< 2n`.
pub fn gauss_laguerre(n: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 || n > MAX_LAGUERRE_NODES {
        return Err(Error::Config(format!(
            "Gauss-Laguerre rules are available for 1..={MAX_LAGUERRE_NODES} nodes, got {n}"
        )));
    }
    let nf = n as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    let mut z = 0.0f64;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut converged = false;
        for _ in 0..100 {
            let (p1, _, pp) = laguerre(n, z);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Laguerre root {i} of {n} did not converge"
            )));
        }
        let (_, p2, pp) = laguerre(n, z);
        nodes.push(z);
        out.push((z, -1.0 / (pp * nf * p2)));
    }
    Ok(out)
}

/// `(L_n(z), L_{n-1}(z), L_n'(z))` by the three-term recurrence.
fn laguerre(n: usize, z: f64) -> (f64, f64, f64) {
    let (mut p1, mut p2) = (1.0, 0.0);
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
    }
    let nf = n as f64;
    (p1, p2, (nf * p1 - nf * p2) / z)
}
