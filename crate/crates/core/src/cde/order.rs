use serde::Serialize;

use crate::error::{Error, Result};
use crate::paths::Path;

use super::fields::VectorFields;
use super::solve::{solve, Method, Partition, SolveOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub step_size: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method: Method,
    #[serde(rename = "N")]
    pub depth: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log(error)` against `log(step size)`.
    pub slope: f64,
}

/// Terminal errors of `solve` for each number of uniform steps, against
/// `reference` or, without one, against a log-ODE solve stepping through
/// every driver segment (exact per segment for linear fields).
///
/// Every step count must divide the number of driver segments.
#[allow(clippy::too_many_arguments)]
pub fn convergence_order(
    x: &Path,
    f: &dyn VectorFields,
    y0: &[f64],
    method: Method,
    depth: usize,
    step_counts: &[usize],
    ode_steps: usize,
    reference: Option<&[f64]>,
) -> Result<ConvergenceReport> {
    if step_counts.len() < 3 {
        return Err(Error::Precondition(
            "fitting an order needs at least three step counts".into(),
        ));
    }
    let segments = x.segments();
    let reference = match reference {
        Some(r) => r.to_vec(),
        None => {
            let opts = SolveOptions::new(Method::LogOde, depth.clamp(1, 2), Partition::PerSegment)
                .with_ode_steps(ode_steps.max(16));
            solve(x, f, y0, &opts)?.terminal().to_vec()
        }
    };
    let span = x.end_time() - x.start_time();
    let mut rows = Vec::with_capacity(step_counts.len());
    for &k in step_counts {
        if k == 0 || segments % k != 0 {
            return Err(Error::Precondition(format!(
                "{k} steps do not divide the {segments} driver segments"
            )));
        }
        let opts = SolveOptions::new(method, depth, Partition::Every(segments / k))
            .with_ode_steps(ode_steps);
        let tr = solve(x, f, y0, &opts)?;
        let error = tr
            .terminal()
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if !(error > 0.0) || !error.is_finite() {
            return Err(Error::Numerical(format!(
                "error {error} at {k} steps cannot enter a log-log fit"
            )));
        }
        rows.push(ConvergenceRow {
            steps: k,
            step_size: span / k as f64,
            error,
        });
    }
    let slope = fit_slope(
        &rows.iter().map(|r| r.step_size.ln()).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.error.ln()).collect::<Vec<_>>(),
    )?;
    Ok(ConvergenceReport {
        method,
        depth,
        rows,
        slope,
    })
}

fn fit_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("step counts must differ".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cde::fields::LinearVectorFields;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [1.0f64, 0.5, 0.25].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [1.0f64, 0.25, 0.0625].iter().map(|v| v.ln()).collect();
        assert!((fit_slope(&x, &y).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn scalar_euler_orders() {
        let n = 256;
        let x = Path::new(
            (0..=n).map(|k| k as f64 / n as f64).collect(),
            (0..=n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    vec![t + 0.3 * (4.0 * t).sin()]
                })
                .collect(),
        )
        .unwrap();
        let f = LinearVectorFields::scalar_exp();
        let exact = [(x.end()[0] - x.start()[0]).exp()];
        let counts = [8, 16, 32, 64];
        let r1 = convergence_order(&x, &f, &[1.0], Method::Euler, 1, &counts, 1, Some(&exact)).unwrap();
        assert!((r1.slope - 1.0).abs() < 0.2, "{}", r1.slope);
        let r2 = convergence_order(&x, &f, &[1.0], Method::Euler, 2, &counts, 1, Some(&exact)).unwrap();
        assert!((r2.slope - 2.0).abs() < 0.3, "{}", r2.slope);
        assert!(convergence_order(&x, &f, &[1.0], Method::Euler, 1, &counts[..2], 1, None).is_err());
        assert!(convergence_order(&x, &f, &[1.0], Method::Euler, 1, &[3, 8, 16], 1, None).is_err());
    }
}
