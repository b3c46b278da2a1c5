use nalgebra::DMatrix;

use crate::error::{shape, Error, Result};
use crate::lyndon::LieElement;
use crate::paths::Path;
use crate::signature::{signature, signature_interval};
use crate::tensor::{GroupLike, TruncatedTensor};

use super::expm::expm;
use super::fields::{matvec, LinearVectorFields, VectorFields};

/// Highest order supported for fields without a linear structure.
pub const MAX_GENERAL_ORDER: usize = 2;

pub(crate) fn check_problem(f: &dyn VectorFields, x: &Path, y: &[f64]) -> Result<()> {
    if x.dim() != f.driver_dim() {
        return Err(shape(format!(
            "driver of dimension {} for {} vector fields",
            x.dim(),
            f.driver_dim()
        )));
    }
    if y.len() != f.state_dim() {
        return Err(shape(format!(
            "state of length {} for fields on R^{}",
            y.len(),
            f.state_dim()
        )));
    }
    Ok(())
}

fn check_general_order(depth: usize) -> Result<()> {
    if depth > MAX_GENERAL_ORDER {
        return Err(Error::Unsupported(format!(
            "order {depth} needs linear vector fields; general fields support N <= {MAX_GENERAL_ORDER}"
        )));
    }
    Ok(())
}

fn jacobians_for(f: &dyn VectorFields, y: &[f64]) -> Result<Vec<DMatrix<f64>>> {
    f.jacobians(y).ok_or_else(|| {
        Error::Precondition("order-2 schemes need the Jacobians of the vector fields".into())
    })
}

/// `sum_{1 <= |I| <= N} t_I A_{i_k} ... A_{i_1}` for a tensor `t`.
pub(crate) fn linear_image(f: &LinearVectorFields, t: &TruncatedTensor) -> DMatrix<f64> {
    let a = f.matrices();
    let e = a[0].nrows();
    let d = a.len();
    let mut total = DMatrix::zeros(e, e);
    let mut level: Vec<DMatrix<f64>> = vec![DMatrix::identity(e, e)];
    for k in 1..=t.depth() {
        let coeffs = t.level(k);
        let mut next = Vec::with_capacity(level.len() * d);
        for prev in &level {
            for aj in a {
                next.push(aj * prev);
            }
        }
        for (m, &c) in next.iter().zip(coeffs) {
            if c != 0.0 {
                total += m * c;
            }
        }
        level = next;
    }
    total
}

/// `sum_{|I| <= N} S_I A_{i_k} ... A_{i_1} y0`, the `N`-th Picard iterate.
pub fn picard_solve_linear(
    f: &LinearVectorFields,
    x: &Path,
    y0: &[f64],
    n: usize,
) -> Result<Vec<f64>> {
    check_problem(f, x, y0)?;
    let sig = signature(x, n)?;
    Ok(apply_signature(f, sig.tensor(), y0))
}

fn apply_signature(f: &LinearVectorFields, sig: &TruncatedTensor, y0: &[f64]) -> Vec<f64> {
    let a = f.matrices();
    let mut out = y0.iter().map(|v| v * sig.scalar()).collect::<Vec<_>>();
    let mut level: Vec<Vec<f64>> = vec![y0.to_vec()];
    for k in 1..=sig.depth() {
        let mut next = Vec::with_capacity(level.len() * a.len());
        for v in &level {
            for aj in a {
                next.push(matvec(aj, v));
            }
        }
        for (v, &c) in next.iter().zip(sig.level(k)) {
            if c != 0.0 {
                out.iter_mut().zip(v).for_each(|(o, vi)| *o += c * vi);
            }
        }
        level = next;
    }
    out
}

/// Step-`N` Euler scheme over `[s, t]`.
pub fn euler_step(
    y: &[f64],
    f: &dyn VectorFields,
    x: &Path,
    s: f64,
    t: f64,
    depth: usize,
) -> Result<Vec<f64>> {
    check_problem(f, x, y)?;
    check_depth(depth)?;
    if f.as_linear().is_none() {
        check_general_order(depth)?;
    }
    let sig = signature_interval(x, s, t, depth)?;
    euler_from_signature(y, f, &sig)
}

/// Step-`N` log-ODE method over `[s, t]`.
pub fn log_ode_step(
    y: &[f64],
    f: &dyn VectorFields,
    x: &Path,
    s: f64,
    t: f64,
    depth: usize,
    ode_steps: usize,
) -> Result<Vec<f64>> {
    check_problem(f, x, y)?;
    check_depth(depth)?;
    if f.as_linear().is_none() {
        check_general_order(depth)?;
    }
    let sig = signature_interval(x, s, t, depth)?;
    log_ode_from_signature(y, f, &sig, ode_steps)
}

fn check_depth(depth: usize) -> Result<()> {
    if depth == 0 {
        return Err(Error::Precondition("step schemes need order N >= 1".into()));
    }
    Ok(())
}

pub(crate) fn euler_from_signature(
    y: &[f64],
    f: &dyn VectorFields,
    sig: &GroupLike,
) -> Result<Vec<f64>> {
    if let Some(lin) = f.as_linear() {
        return Ok(apply_signature(lin, sig.tensor(), y));
    }
    let depth = sig.depth();
    check_general_order(depth)?;
    let d = f.driver_dim();
    let fy = f.eval(y);
    let mut out = y.to_vec();
    let s1 = sig.tensor().level(1);
    for (i, fi) in fy.iter().enumerate() {
        out.iter_mut().zip(fi).for_each(|(o, v)| *o += s1[i] * v);
    }
    if depth >= 2 {
        let jac = jacobians_for(f, y)?;
        let s2 = sig.tensor().level(2);
        for (i, fi) in fy.iter().enumerate() {
            for (j, jj) in jac.iter().enumerate() {
                let c = s2[i * d + j];
                if c != 0.0 {
                    let v = matvec(jj, fi);
                    out.iter_mut().zip(&v).for_each(|(o, vi)| *o += c * vi);
                }
            }
        }
    }
    finite(out)
}

pub(crate) fn log_ode_from_signature(
    y: &[f64],
    f: &dyn VectorFields,
    sig: &GroupLike,
    ode_steps: usize,
) -> Result<Vec<f64>> {
    let log = sig.log()?;
    if let Some(lin) = f.as_linear() {
        let m = expm(&linear_image(lin, &log))?;
        return finite(matvec(&m, y));
    }
    check_general_order(sig.depth())?;
    if ode_steps == 0 {
        return Err(Error::Config("ode_steps must be at least 1".into()));
    }
    let lie = LieElement::from_tensor(&log)?;
    let field = LogOdeField::new(f, &lie, y)?;
    finite(rk4(&field, y, ode_steps))
}

/// `z -> sum_i c_i f_i(z) + sum_{i<j} c_ij [f_i, f_j](z)` with
/// `[f_i, f_j] = grad f_j f_i - grad f_i f_j`.
struct LogOdeField<'a> {
    f: &'a dyn VectorFields,
    first: Vec<f64>,
    second: Vec<(usize, usize, f64)>,
}

impl<'a> LogOdeField<'a> {
    fn new(f: &'a dyn VectorFields, lie: &LieElement, y: &[f64]) -> Result<Self> {
        let d = f.driver_dim();
        let mut first = vec![0.0; d];
        let mut second = Vec::new();
        for (w, &c) in lie.words().iter().zip(lie.coeffs()) {
            let l = w.letters();
            match l.len() {
                1 => first[l[0] as usize - 1] = c,
                2 if c != 0.0 => second.push((l[0] as usize - 1, l[1] as usize - 1, c)),
                _ => {}
            }
        }
        if !second.is_empty() && f.jacobians(y).is_none() {
            return Err(Error::Precondition(
                "order-2 log-ODE steps need the Jacobians of the vector fields".into(),
            ));
        }
        Ok(LogOdeField { f, first, second })
    }

    fn eval(&self, z: &[f64]) -> Vec<f64> {
        let fz = self.f.eval(z);
        let mut out = vec![0.0; z.len()];
        for (c, fi) in self.first.iter().zip(&fz) {
            out.iter_mut().zip(fi).for_each(|(o, v)| *o += c * v);
        }
        if !self.second.is_empty() {
            let jac = self.f.jacobians(z).unwrap_or_default();
            for &(i, j, c) in &self.second {
                let a = matvec(&jac[j], &fz[i]);
                let b = matvec(&jac[i], &fz[j]);
                for k in 0..out.len() {
                    out[k] += c * (a[k] - b[k]);
                }
            }
        }
        out
    }
}

fn rk4(field: &LogOdeField, y: &[f64], steps: usize) -> Vec<f64> {
    let h = 1.0 / steps as f64;
    let axpy = |z: &[f64], k: &[f64], a: f64| -> Vec<f64> {
        z.iter().zip(k).map(|(zi, ki)| zi + a * ki).collect()
    };
    let mut z = y.to_vec();
    for _ in 0..steps {
        let k1 = field.eval(&z);
        let k2 = field.eval(&axpy(&z, &k1, h / 2.0));
        let k3 = field.eval(&axpy(&z, &k2, h / 2.0));
        let k4 = field.eval(&axpy(&z, &k3, h));
        for i in 0..z.len() {
            z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    z
}

/// Matrix of the linear step map `y -> E y` of one scheme step.
pub(crate) fn linear_step_matrix(
    f: &LinearVectorFields,
    sig: &GroupLike,
    log_ode: bool,
) -> Result<DMatrix<f64>> {
    let e = f.matrices()[0].nrows();
    if log_ode {
        expm(&linear_image(f, &sig.log()?))
    } else {
        Ok(DMatrix::identity(e, e) + linear_image(f, sig.tensor()))
    }
}

fn finite(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Numerical("the state left the finite range".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cde::fields::{AsGeneral, FnVectorFields};

    fn unit_time() -> Path {
        Path::linear(&[0.0], &[1.0], 0.0, 1.0).unwrap()
    }

    #[test]
    fn scalar_picard_partial_sums() {
        let f = LinearVectorFields::scalar_exp();
        assert_eq!(picard_solve_linear(&f, &unit_time(), &[1.0], 0).unwrap(), vec![1.0]);
        let y = picard_solve_linear(&f, &unit_time(), &[1.0], 2).unwrap();
        assert!((y[0] - 2.5).abs() < 1e-15);
        let y = picard_solve_linear(&f, &unit_time(), &[1.0], 16).unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn rolling_ball_picard_stays_on_sphere() {
        let f = LinearVectorFields::rolling_ball();
        let x = Path::from_points(vec![vec![0.0, 0.0], vec![0.8, -0.3], vec![0.2, 0.9]]).unwrap();
        let y = picard_solve_linear(&f, &x, &[1.0, 0.0, 0.0], 12).unwrap();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_increment_is_identity() {
        let f = LinearVectorFields::rolling_ball();
        let x = Path::from_points(vec![vec![0.5, 0.5]; 2]).unwrap();
        let y = [0.6, 0.0, 0.8];
        assert_eq!(euler_step(&y, &f, &x, 0.0, 1.0, 3).unwrap(), y.to_vec());
        assert_eq!(log_ode_step(&y, &f, &x, 0.0, 1.0, 3, 4).unwrap(), y.to_vec());
        let g = AsGeneral(&f);
        assert_eq!(euler_step(&y, &g, &x, 0.0, 1.0, 2).unwrap(), y.to_vec());
        assert_eq!(log_ode_step(&y, &g, &x, 0.0, 1.0, 2, 4).unwrap(), y.to_vec());
    }

    #[test]
    fn euler_order_one_formula() {
        let f = LinearVectorFields::rolling_ball();
        let x = Path::from_points(vec![vec![0.0, 0.0], vec![0.3, -0.2]]).unwrap();
        let y = [0.0, 0.6, 0.8];
        let got = euler_step(&y, &f, &x, 0.0, 1.0, 1).unwrap();
        let fy = f.eval(&y);
        for k in 0..3 {
            let want = y[k] + 0.3 * fy[0][k] - 0.2 * fy[1][k];
            assert!((got[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn single_step_euler_equals_picard() {
        let f = LinearVectorFields::rolling_ball();
        let x = Path::from_points(vec![vec![0.0, 0.0], vec![0.3, -0.2], vec![0.5, 0.4]]).unwrap();
        let y = [1.0, 0.0, 0.0];
        for n in 1..6 {
            let a = euler_step(&y, &f, &x, 0.0, 2.0, n).unwrap();
            let b = picard_solve_linear(&f, &x, &y, n).unwrap();
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() <= 1e-13 * q.abs().max(1.0));
            }
        }
    }

    #[test]
    fn linear_log_ode_order_one_is_matrix_exponential() {
        let f = LinearVectorFields::rolling_ball();
        let x = Path::from_points(vec![vec![0.0, 0.0], vec![0.7, 0.4]]).unwrap();
        let y = [1.0, 0.0, 0.0];
        let got = log_ode_step(&y, &f, &x, 0.0, 1.0, 1, 1).unwrap();
        let m = &f.matrices()[0] * 0.7 + &f.matrices()[1] * 0.4;
        let want = matvec(&m.exp(), &y);
        for (p, q) in got.iter().zip(&want) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn general_paths_agree_with_linear_paths() {
        let f = LinearVectorFields::rolling_ball();
        let g = AsGeneral(&f);
        let x = Path::from_points(vec![vec![0.0, 0.0], vec![0.1, -0.05], vec![0.15, 0.1]]).unwrap();
        let y = [0.0, 0.6, 0.8];
        for n in 1..=2 {
            let a = euler_step(&y, &f, &x, 0.0, 2.0, n).unwrap();
            let b = euler_step(&y, &g, &x, 0.0, 2.0, n).unwrap();
            assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-15));
        }
        // with N = 2 the linear route exponentiates exactly while RK4 converges
        let a = log_ode_step(&y, &f, &x, 0.0, 2.0, 2, 1).unwrap();
        let b = log_ode_step(&y, &g, &x, 0.0, 2.0, 2, 64).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
    }

    #[test]
    fn general_field_guards() {
        let f = LinearVectorFields::rolling_ball();
        let g = AsGeneral(&f);
        let x = Path::from_points(vec![vec![0.0, 0.0], vec![0.1, -0.05]]).unwrap();
        let y = [1.0, 0.0, 0.0];
        let err = euler_step(&y, &g, &x, 0.0, 1.0, 3).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        let no_jac = FnVectorFields::new(2, 3, |y: &[f64]| vec![y.to_vec(), y.to_vec()]);
        assert!(euler_step(&y, &no_jac, &x, 0.0, 1.0, 1).is_ok());
        assert!(euler_step(&y, &no_jac, &x, 0.0, 1.0, 2).is_err());
        assert!(euler_step(&y, &f, &x, 0.0, 1.0, 0).is_err());
        assert!(euler_step(&[1.0], &f, &x, 0.0, 1.0, 1).is_err());
        assert!(log_ode_step(&y, &g, &x, 0.0, 1.0, 2, 0).is_err());
    }

    #[test]
    fn nonlinear_log_ode_matches_fine_euler() {
        // dy = sin(y) dx1 + y^2/4 dx2 in one dimension
        let f = FnVectorFields::new(2, 1, |y: &[f64]| vec![vec![y[0].sin()], vec![0.25 * y[0] * y[0]]])
            .with_jacobians(|y: &[f64]| {
                vec![
                    DMatrix::from_element(1, 1, y[0].cos()),
                    DMatrix::from_element(1, 1, 0.5 * y[0]),
                ]
            });
        let x = Path::linear(&[0.0, 0.0], &[0.2, 0.1], 0.0, 1.0).unwrap();
        let y = [0.5];
        let coarse = log_ode_step(&y, &f, &x, 0.0, 1.0, 2, 200).unwrap();
        let mut fine = y.to_vec();
        let n = 20_000;
        for k in 0..n {
            let (s, t) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
            fine = euler_step(&fine, &f, &x, s, t, 2).unwrap();
        }
        assert!((coarse[0] - fine[0]).abs() < 1e-8);
    }
}
