use serde::Serialize;

use crate::error::{Error, Result};
use crate::paths::Path;
use crate::tensor::MAX_LEVEL_SIZE;

use super::check_same_dim;

/// Largest accepted dyadic refinement.
pub const MAX_REFINEMENT: u32 = 12;

/// Unweighted signature kernel by the finite-difference scheme on a grid
/// that splits every pair of data segments into `2^lambda x 2^lambda` cells.
pub fn pde_kernel(x: &Path, y: &Path, lambda: u32) -> Result<f64> {
    let inc = IncrementGram::new(x, y, lambda)?;
    Ok(inc.solve(1.0))
}

/// Full solution grid, `(rows, cols) = (2^lambda m + 1, 2^lambda n + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeGrid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major values; row `p` is the `p`-th grid time of `x`.
    pub values: Vec<f64>,
}

impl PdeGrid {
    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.cols + q]
    }

    pub fn corner(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

pub fn pde_kernel_grid(x: &Path, y: &Path, lambda: u32) -> Result<PdeGrid> {
    let inc = IncrementGram::new(x, y, lambda)?;
    let (rows, cols) = (inc.rows() + 1, inc.cols() + 1);
    if rows.saturating_mul(cols) > MAX_LEVEL_SIZE {
        return Err(Error::Resource(format!(
            "a {rows} x {cols} grid is too large to store"
        )));
    }
    let mut values = vec![1.0; rows * cols];
    for p in 0..inc.rows() {
        let (prev, cur) = values[p * cols..(p + 2) * cols].split_at_mut(cols);
        inc.sweep_row(p, 1.0, prev, cur);
    }
    Ok(PdeGrid { rows, cols, values })
}

/// Increment inner products `<dx_i, dy_j> / 4^lambda`, one per pair of
/// data segments; every cell in that block shares it.
pub(crate) struct IncrementGram {
    m: usize,
    n: usize,
    lambda: u32,
    values: Vec<f64>,
}

impl IncrementGram {
    pub(crate) fn new(x: &Path, y: &Path, lambda: u32) -> Result<Self> {
        check_same_dim(x, y)?;
        if lambda > MAX_REFINEMENT {
            return Err(Error::Resource(format!(
                "refinement {lambda} exceeds the grid guard {MAX_REFINEMENT}"
            )));
        }
        let (m, n) = (x.segments(), y.segments());
        let cell = 0.25f64.powi(lambda as i32);
        let dy: Vec<Vec<f64>> = y.increments().collect();
        let mut values = Vec::with_capacity(m * n);
        for dx in x.increments() {
            for d in &dy {
                values.push(crate::tensor::dot(&dx, d) * cell);
            }
        }
        Ok(IncrementGram {
            m,
            n,
            lambda,
            values,
        })
    }

    fn rows(&self) -> usize {
        self.m << self.lambda
    }

    fn cols(&self) -> usize {
        self.n << self.lambda
    }

    fn sweep_row(&self, p: usize, scale: f64, prev: &[f64], cur: &mut [f64]) {
        let block = &self.values[(p >> self.lambda) * self.n..][..self.n];
        cur[0] = 1.0;
        for q in 0..self.cols() {
            let c = 0.5 * scale * block[q >> self.lambda];
            cur[q + 1] = cur[q] + prev[q + 1] - prev[q] + c * (cur[q] + prev[q + 1]);
        }
    }

    /// Corner value for the path pair `(scale x, y)`.
    pub(crate) fn solve(&self, scale: f64) -> f64 {
        let cols = self.cols() + 1;
        let mut prev = vec![1.0; cols];
        let mut cur = vec![1.0; cols];
        for p in 0..self.rows() {
            self.sweep_row(p, scale, &prev, &mut cur);
            std::mem::swap(&mut prev, &mut cur);
        }
        prev[cols - 1]
    }
}
