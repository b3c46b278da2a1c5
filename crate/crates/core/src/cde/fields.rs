use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Vector fields `f_1, ..., f_d` on `R^e` driving `dy = sum_i f_i(y) dx^i`.
pub trait VectorFields: Sync {
    fn driver_dim(&self) -> usize;

    fn state_dim(&self) -> usize;

    /// `[f_1(y), ..., f_d(y)]`.
    fn eval(&self, y: &[f64]) -> Vec<Vec<f64>>;

    /// `[grad f_1(y), ..., grad f_d(y)]`, each `e x e`, when available.
    fn jacobians(&self, _y: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        None
    }

    /// Linear fields unlock exact matrix formulas and any order.
    fn as_linear(&self) -> Option<&LinearVectorFields> {
        None
    }
}

/// `f_i(y) = A_i y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLinear", into = "RawLinear")]
pub struct LinearVectorFields {
    matrices: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawLinear {
    matrices: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawLinear> for LinearVectorFields {
    type Error = Error;

    fn try_from(raw: RawLinear) -> Result<Self> {
        LinearVectorFields::from_rows(raw.matrices)
    }
}

impl From<LinearVectorFields> for RawLinear {
    fn from(f: LinearVectorFields) -> Self {
        RawLinear {
            matrices: f
                .matrices
                .iter()
                .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
                .collect(),
        }
    }
}

impl LinearVectorFields {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let e = matrices
            .first()
            .ok_or_else(|| shape("at least one matrix is required"))?
            .nrows();
        if e == 0 {
            return Err(shape("state dimension must be positive"));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.nrows() != e || m.ncols() != e {
                return Err(shape(format!(
                    "matrix {} is {}x{}, expected {e}x{e}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(crate::error::invalid(format!("matrix {} has non-finite entries", i + 1)));
            }
        }
        Ok(LinearVectorFields { matrices })
    }

    /// From row-major nested lists, one `e x e` matrix per driver coordinate.
    pub fn from_rows(matrices: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mats = matrices
            .into_iter()
            .map(|rows| {
                let e = rows.len();
                if rows.iter().any(|r| r.len() != e) {
                    return Err(shape("vector-field matrices must be square"));
                }
                Ok(DMatrix::from_fn(e, e, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mats)
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// Rolling a unit ball on the plane: `A(x) = x_1 (e_1 e_3^T - e_3 e_1^T)
    /// + x_2 (e_2 e_3^T - e_3 e_2^T)`.
    pub fn rolling_ball() -> Self {
        let mut a1 = DMatrix::zeros(3, 3);
        a1[(0, 2)] = 1.0;
        a1[(2, 0)] = -1.0;
        let mut a2 = DMatrix::zeros(3, 3);
        a2[(1, 2)] = 1.0;
        a2[(2, 1)] = -1.0;
        LinearVectorFields {
            matrices: vec![a1, a2],
        }
    }

    /// `dy = y dx` in one dimension.
    pub fn scalar_exp() -> Self {
        LinearVectorFields {
            matrices: vec![DMatrix::from_element(1, 1, 1.0)],
        }
    }

    /// `-A_i^T`, the fields of the adjoint equation.
    pub fn adjoint(&self) -> Self {
        LinearVectorFields {
            matrices: self.matrices.iter().map(|m| -m.transpose()).collect(),
        }
    }
}

impl VectorFields for LinearVectorFields {
    fn driver_dim(&self) -> usize {
        self.matrices.len()
    }

    fn state_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    fn eval(&self, y: &[f64]) -> Vec<Vec<f64>> {
        self.matrices.iter().map(|m| matvec(m, y)).collect()
    }

    fn jacobians(&self, _y: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        Some(self.matrices.clone())
    }

    fn as_linear(&self) -> Option<&LinearVectorFields> {
        Some(self)
    }
}

type EvalFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync;

/// Vector fields given by closures.
pub struct FnVectorFields {
    driver_dim: usize,
    state_dim: usize,
    eval: Box<EvalFn>,
    jac: Option<Box<JacFn>>,
}

impl FnVectorFields {
    pub fn new(
        driver_dim: usize,
        state_dim: usize,
        eval: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        FnVectorFields {
            driver_dim,
            state_dim,
            eval: Box::new(eval),
            jac: None,
        }
    }

    pub fn with_jacobians(
        mut self,
        jac: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }
}

impl VectorFields for FnVectorFields {
    fn driver_dim(&self) -> usize {
        self.driver_dim
    }

    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn eval(&self, y: &[f64]) -> Vec<Vec<f64>> {
        (self.eval)(y)
    }

    fn jacobians(&self, y: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        self.jac.as_ref().map(|j| j(y))
    }
}

/// Hides linearity so the general-field code paths run on linear fields.
pub struct AsGeneral<'a, F: VectorFields>(pub &'a F);

impl<F: VectorFields> VectorFields for AsGeneral<'_, F> {
    fn driver_dim(&self) -> usize {
        self.0.driver_dim()
    }

    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    fn eval(&self, y: &[f64]) -> Vec<Vec<f64>> {
        self.0.eval(y)
    }

    fn jacobians(&self, y: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        self.0.jacobians(y)
    }
}

/// Named field sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinFields {
    RollingBall,
    ScalarExp,
}

impl BuiltinFields {
    pub fn fields(self) -> LinearVectorFields {
        match self {
            BuiltinFields::RollingBall => LinearVectorFields::rolling_ball(),
            BuiltinFields::ScalarExp => LinearVectorFields::scalar_exp(),
        }
    }

    pub fn default_initial_state(self) -> Vec<f64> {
        match self {
            BuiltinFields::RollingBall => vec![1.0, 0.0, 0.0],
            BuiltinFields::ScalarExp => vec![1.0],
        }
    }
}

pub(crate) fn matvec(m: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * y[j]).sum())
        .collect()
}
