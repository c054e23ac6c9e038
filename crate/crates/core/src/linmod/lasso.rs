//! L1-penalized least squares by cyclic coordinate descent.
//!
//! Minimizes `(1 / 2m) ||y - X b||^2 + lambda ||b||_1` for standardized `X`
//! (column means 0, population standard deviations 1) and centered `y`.

use super::{Coefficient, Design, FitResult};
use crate::error::{Error, Result};
use crate::linalg::{dot, mean};

/// Sweeps stop once no coefficient moves by this much.
pub const CONVERGENCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 100_000;

const MEAN_TOLERANCE: f64 = 1e-8;
const SD_TOLERANCE: f64 = 1e-6;

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

/// Smallest penalty at which every coefficient is zero: `max_j |<x_j, y>| / m`.
pub fn lasso_lambda_max(x: Design<'_>, y: &[f64]) -> f64 {
    let m = y.len() as f64;
    x.columns
        .iter()
        .map(|c| dot(c, y).abs() / m)
        .fold(0.0, f64::max)
}

/// Objective value after each full sweep, starting from the zero vector.
#[derive(Debug, Clone)]
pub struct LassoTrace {
    pub fit: FitResult,
    pub objectives: Vec<f64>,
    pub sweeps: usize,
}

fn check_inputs(x: Design<'_>, y: &[f64], lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::OutOfRange(format!("lambda {lambda}")));
    }
    let m = y.len();
    if m < 2 {
        return Err(Error::TooFewObservations {
            n_obs: m,
            n_params: x.len() + 1,
        });
    }
    let y_scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if mean(y).abs() > MEAN_TOLERANCE * y_scale {
        return Err(Error::InvalidInput("lasso response is not centered".into()));
    }
    for (col, name) in x.columns.iter().zip(x.names) {
        if col.len() != m {
            return Err(Error::InvalidInput(format!(
                "predictor `{name}` has wrong length"
            )));
        }
        let mu = mean(col);
        let sd = (col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / m as f64).sqrt();
        if mu.abs() > MEAN_TOLERANCE || (sd - 1.0).abs() > SD_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "lasso predictor `{name}` is not standardized (mean {mu:e}, sd {sd})"
            )));
        }
    }
    Ok(())
}

fn objective(residuals: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let m = residuals.len() as f64;
    dot(residuals, residuals) / (2.0 * m) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Lasso fit at a single penalty. `selected` lists the nonzero coefficients.
pub fn lasso_fit(x: Design<'_>, y: &[f64], lambda: f64) -> Result<FitResult> {
    lasso_fit_traced(x, y, lambda).map(|t| t.fit)
}

/// [`lasso_fit`] that also records the objective after every sweep.
pub fn lasso_fit_traced(x: Design<'_>, y: &[f64], lambda: f64) -> Result<LassoTrace> {
    check_inputs(x, y, lambda)?;
    let m = y.len() as f64;
    let p = x.len();
    // x_j^T x_j / m; equal to 1 up to rounding for standardized columns
    let scale: Vec<f64> = x.columns.iter().map(|c| dot(c, c) / m).collect();
    let mut beta = vec![0.0; p];
    let mut residuals = y.to_vec();
    let mut objectives = Vec::new();
    let mut sweeps = 0;
    loop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence {
                measure: "lasso coordinate descent".into(),
                iterations: sweeps,
            });
        }
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let col = x.columns[j];
            let z = dot(col, &residuals) / m + scale[j] * beta[j];
            let updated = soft_threshold(z, lambda) / scale[j];
            let delta = updated - beta[j];
            if delta != 0.0 {
                for (r, v) in residuals.iter_mut().zip(col.iter()) {
                    *r -= delta * v;
                }
                beta[j] = updated;
            }
            max_change = max_change.max(delta.abs());
        }
        objectives.push(objective(&residuals, &beta, lambda));
        if max_change < CONVERGENCE {
            break;
        }
    }
    let coefficients: Vec<Coefficient> = beta
        .iter()
        .zip(x.names)
        .filter(|(b, _)| **b != 0.0)
        .map(|(&estimate, name)| Coefficient {
            name: name.clone(),
            estimate,
            std_error: None,
            t_stat: None,
            p_value: None,
        })
        .collect();
    let fit = FitResult {
        intercept: mean(y),
        selected: coefficients.iter().map(|c| c.name.clone()).collect(),
        coefficients,
        rss: dot(&residuals, &residuals),
        n_obs: y.len(),
        hit_iteration_cap: false,
    };
    Ok(LassoTrace {
        fit,
        objectives,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{standardize, DataTable};
    use crate::linmod::ols_fit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("x{i}")).collect()
    }

    fn random_standardized(seed: u64, m: usize, p: usize) -> (DataTable, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..m).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let t = DataTable::new(names(p), cols).unwrap();
        let (s, _) = standardize(&t).unwrap();
        let mut y: Vec<f64> = (0..m)
            .map(|i| {
                s.column(0)[i] * 1.5 - s.column(1)[i] * 0.7
                    + 0.5 * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let mu = mean(&y);
        y.iter_mut().for_each(|v| *v -= mu);
        (s, y)
    }

    #[test]
    fn rejects_unstandardized_input() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [-1.0, 0.0, 0.5, 0.5];
        let cols = [x.as_slice()];
        let n = names(1);
        let d = Design::new(&cols, &n).unwrap();
        assert!(matches!(lasso_fit(d, &y, 0.1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rejects_bad_lambda() {
        let (s, y) = random_standardized(1, 50, 2);
        let cols: Vec<&[f64]> = s.columns().iter().map(Vec::as_slice).collect();
        let d = Design::new(&cols, s.names()).unwrap();
        assert!(matches!(lasso_fit(d, &y, 0.0), Err(Error::OutOfRange(_))));
        assert!(matches!(lasso_fit(d, &y, -1.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn null_model_at_lambda_max() {
        let (s, y) = random_standardized(2, 80, 4);
        let cols: Vec<&[f64]> = s.columns().iter().map(Vec::as_slice).collect();
        let d = Design::new(&cols, s.names()).unwrap();
        let lmax = lasso_lambda_max(d, &y);
        let fit = lasso_fit(d, &y, lmax).unwrap();
        assert!(fit.selected.is_empty());
        let fit = lasso_fit(d, &y, lmax * 0.99).unwrap();
        assert_eq!(fit.selected.len(), 1);
    }

    #[test]
    fn tiny_lambda_approaches_ols() {
        let (s, y) = random_standardized(3, 200, 3);
        let cols: Vec<&[f64]> = s.columns().iter().map(Vec::as_slice).collect();
        let d = Design::new(&cols, s.names()).unwrap();
        let lasso = lasso_fit(d, &y, 1e-12).unwrap();
        let ols = ols_fit(d, &y).unwrap();
        for c in &ols.coefficients {
            let l = lasso.coefficient(&c.name).unwrap().estimate;
            assert!(
                (l - c.estimate).abs() < 1e-4,
                "{}: {l} vs {}",
                c.name,
                c.estimate
            );
        }
    }

    #[test]
    fn objective_never_increases() {
        let (s, y) = random_standardized(4, 120, 6);
        let cols: Vec<&[f64]> = s.columns().iter().map(Vec::as_slice).collect();
        let d = Design::new(&cols, s.names()).unwrap();
        let trace = lasso_fit_traced(d, &y, 0.01).unwrap();
        let start = objective(&y, &vec![0.0; 6], 0.01);
        let mut prev = start;
        for &o in &trace.objectives {
            assert!(o <= prev + 1e-15, "{o} > {prev}");
            prev = o;
        }
    }
}
