use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 60;
const TERM_TOL: f64 = 1e-17;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring around a Taylor series.
pub fn expm(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(crate::error::shape("matrix exponential of a non-square matrix"));
    }
    let norm = norm1(m);
    if !norm.is_finite() {
        return Err(Error::Numerical("matrix exponential of a non-finite matrix".into()));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = m / 2f64.powi(squarings);
    let n = m.nrows();
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    let mut converged = false;
    for k in 1..=MAX_TERMS {
        term = &term * &a / k as f64;
        sum += &term;
        if norm1(&term) <= TERM_TOL * norm1(&sum) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(
            "Taylor series of the matrix exponential did not converge".into(),
        ));
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if sum.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(sum)
}
