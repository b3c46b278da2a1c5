use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::paths::Path;
use crate::signature::signature;

use super::fields::{matvec, VectorFields};
use super::step::{
    check_problem, euler_from_signature, linear_step_matrix, log_ode_from_signature,
    MAX_GENERAL_ORDER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    LogOde,
    Picard,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Method::Euler),
            "logode" | "log-ode" => Ok(Method::LogOde),
            "picard" => Ok(Method::Picard),
            _ => Err(Error::Config(format!("unknown method {s:?}"))),
        }
    }
}

/// Which driver breakpoints become steps of the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    PerSegment,
    /// One step per `m` consecutive driver segments; a shorter final step
    /// takes the remainder.
    Every(usize),
}

impl Partition {
    /// Breakpoint indices of the steps, first and last included.
    pub fn breakpoints(self, segments: usize) -> Result<Vec<usize>> {
        let m = match self {
            Partition::PerSegment => 1,
            Partition::Every(0) => {
                return Err(Error::Config("partition step must be at least one segment".into()))
            }
            Partition::Every(m) => m,
        };
        let mut out: Vec<usize> = (0..segments).step_by(m).collect();
        out.push(segments);
        Ok(out)
    }
}

/// Solution sampled at the partition points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn terminal(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: Method,
    #[serde(rename = "N")]
    pub depth: usize,
    pub partition: Partition,
    pub ode_steps: usize,
}

impl SolveOptions {
    pub fn new(method: Method, depth: usize, partition: Partition) -> Self {
        SolveOptions {
            method,
            depth,
            partition,
            ode_steps: 8,
        }
    }

    pub fn with_ode_steps(mut self, ode_steps: usize) -> Self {
        self.ode_steps = ode_steps;
        self
    }

    fn check(&self, f: &dyn VectorFields) -> Result<()> {
        let linear = f.as_linear().is_some();
        if self.method == Method::Picard && !linear {
            return Err(Error::Unsupported("Picard iteration needs linear vector fields".into()));
        }
        if self.depth == 0 && self.method != Method::Picard {
            return Err(Error::Precondition("step schemes need order N >= 1".into()));
        }
        if !linear && self.depth > MAX_GENERAL_ORDER {
            return Err(Error::Unsupported(format!(
                "order {} needs linear vector fields; general fields support N <= {MAX_GENERAL_ORDER}",
                self.depth
            )));
        }
        if self.method == Method::LogOde && !linear && self.ode_steps == 0 {
            return Err(Error::Config("ode_steps must be at least 1".into()));
        }
        Ok(())
    }
}

fn step(y: &[f64], f: &dyn VectorFields, piece: &Path, opts: &SolveOptions) -> Result<Vec<f64>> {
    let sig = signature(piece, opts.depth)?;
    match opts.method {
        // Picard iteration restarted at each step is the same formula as
        // step-N Euler for linear fields.
        Method::Euler | Method::Picard => euler_from_signature(y, f, &sig),
        Method::LogOde => log_ode_from_signature(y, f, &sig, opts.ode_steps),
    }
}

/// Iterates the chosen scheme across the partition of the driver.
pub fn solve(x: &Path, f: &dyn VectorFields, y0: &[f64], opts: &SolveOptions) -> Result<Trajectory> {
    check_problem(f, x, y0)?;
    opts.check(f)?;
    let points = opts.partition.breakpoints(x.segments())?;
    let mut y = y0.to_vec();
    let mut times = vec![x.times()[points[0]]];
    let mut states = vec![y.clone()];
    for w in points.windows(2) {
        y = step(&y, f, &x.slice(w[0], w[1])?, opts)?;
        times.push(x.times()[w[1]]);
        states.push(y.clone());
    }
    Ok(Trajectory { times, states })
}

/// Gradient of `L(y_T)` with respect to `y_0`, given `grad L(y_T)`.
///
/// For linear fields each step is a linear map `E_k`, and the adjoint is
/// the exact transpose product `E_1^T ... E_K^T grad`. For the log-ODE this
/// coincides with solving the adjoint equation with fields `-A_i^T` along the
/// reversed partition. General fields integrate the augmented system
/// `(y, a)` backwards along the reversed driver with the forward scheme,
/// restarting `y` from the stored trajectory at every partition point.
pub fn adjoint_solve(
    x: &Path,
    f: &dyn VectorFields,
    trajectory: &Trajectory,
    grad: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let e = f.state_dim();
    if grad.len() != e {
        return Err(shape(format!("gradient of length {} for state dimension {e}", grad.len())));
    }
    check_problem(f, x, trajectory.states.first().map_or(&[], Vec::as_slice))?;
    opts.check(f)?;
    let idx = partition_indices(x, trajectory)?;
    let mut a = grad.to_vec();
    if let Some(lin) = f.as_linear() {
        for w in idx.windows(2).rev() {
            let sig = signature(&x.slice(w[0], w[1])?, opts.depth)?;
            let m: DMatrix<f64> = linear_step_matrix(lin, &sig, opts.method == Method::LogOde)?;
            a = matvec(&m.transpose(), &a);
        }
        return Ok(a);
    }
    if f.jacobians(&trajectory.states[0]).is_none() {
        return Err(Error::Precondition("adjoints need the Jacobians of the vector fields".into()));
    }
    let aug = AdjointFields { f };
    for (k, w) in idx.windows(2).enumerate().rev() {
        let piece = x.slice(w[0], w[1])?.reverse();
        let mut z = trajectory.states[k + 1].clone();
        z.extend_from_slice(&a);
        let out = step(&z, &aug, &piece, opts)?;
        a = out[e..].to_vec();
    }
    Ok(a)
}

fn partition_indices(x: &Path, trajectory: &Trajectory) -> Result<Vec<usize>> {
    if trajectory.times.len() != trajectory.states.len() || trajectory.times.len() < 2 {
        return Err(shape("trajectory needs at least two matching times and states"));
    }
    let mut out = Vec::with_capacity(trajectory.times.len());
    let mut from = 0;
    for &t in &trajectory.times {
        let i = x.times()[from..]
            .iter()
            .position(|&s| s == t)
            .map(|i| i + from)
            .ok_or_else(|| {
                Error::Precondition(format!("trajectory time {t} is not a driver breakpoint"))
            })?;
        out.push(i);
        from = i;
    }
    if out[0] != 0 || *out.last().unwrap() != x.len() - 1 {
        return Err(Error::Precondition(
            "trajectory must span the whole driver".into(),
        ));
    }
    Ok(out)
}

/// `g_i(y, a) = (f_i(y), -grad f_i(y)^T a)`, whose flow along the reversed
/// driver carries `(y_T, a_T)` back to `(y_0, a_0)`.
struct AdjointFields<'a> {
    f: &'a dyn VectorFields,
}

impl VectorFields for AdjointFields<'_> {
    fn driver_dim(&self) -> usize {
        self.f.driver_dim()
    }

    fn state_dim(&self) -> usize {
        2 * self.f.state_dim()
    }

    fn eval(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let e = self.f.state_dim();
        let (y, a) = z.split_at(e);
        let fy = self.f.eval(y);
        let jac = self.f.jacobians(y).unwrap_or_default();
        fy.into_iter()
            .zip(&jac)
            .map(|(mut v, j)| {
                v.extend(matvec(&j.transpose(), a).into_iter().map(|c| -c));
                v
            })
            .collect()
    }

    /// The `y`-derivative of `-grad f_i(y)^T a` is taken by central
    /// differences of the Jacobian.
    fn jacobians(&self, z: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        let e = self.f.state_dim();
        let (y, a) = z.split_at(e);
        let jac = self.f.jacobians(y)?;
        let mut out: Vec<DMatrix<f64>> = jac
            .iter()
            .map(|j| {
                let mut m = DMatrix::zeros(2 * e, 2 * e);
                m.view_mut((0, 0), (e, e)).copy_from(j);
                m.view_mut((e, e), (e, e)).copy_from(&(-j.transpose()));
                m
            })
            .collect();
        for c in 0..e {
            let h = 1e-6 * y[c].abs().max(1.0);
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[c] += h;
            ym[c] -= h;
            let jp = self.f.jacobians(&yp)?;
            let jm = self.f.jacobians(&ym)?;
            for (i, m) in out.iter_mut().enumerate() {
                let col = matvec(&((&jp[i] - &jm[i]).transpose() / (2.0 * h)), a);
                for r in 0..e {
                    m[(e + r, c)] = -col[r];
                }
            }
        }
        Some(out)
    }
}
