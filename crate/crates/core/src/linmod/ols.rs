use super::{Coefficient, Design, FitResult};
use crate::error::{Error, Result};
use crate::ingest::DataTable;
use crate::linalg::{dot, mean, Qr};

use super::dist::student_t_sf;

/// Ordinary least squares with intercept on every offered predictor.
pub fn ols_fit(x: Design<'_>, y: &[f64]) -> Result<FitResult> {
    let all: Vec<usize> = (0..x.len()).collect();
    fit_subset(x, &all, y)
}

/// [`ols_fit`] over every column of a table.
pub fn ols_fit_table(x: &DataTable, y: &[f64]) -> Result<FitResult> {
    let cols: Vec<&[f64]> = x.columns().iter().map(Vec::as_slice).collect();
    ols_fit(Design::new(&cols, x.names())?, y)
}

/// OLS on the predictors at `subset` (indices into `x`, any order).
///
/// Predictors and response are centered before the QR solve, which leaves
/// slopes and their standard errors unchanged and keeps the intercept out of
/// the factorization.
pub(crate) fn fit_subset(x: Design<'_>, subset: &[usize], y: &[f64]) -> Result<FitResult> {
    let n = y.len();
    let p = subset.len();
    if n < p + 2 {
        return Err(Error::TooFewObservations {
            n_obs: n,
            n_params: p + 1,
        });
    }
    for &j in subset {
        if x.columns[j].len() != n {
            return Err(Error::InvalidInput(format!(
                "predictor `{}` has {} rows, response has {n}",
                x.names[j],
                x.columns[j].len()
            )));
        }
    }
    let y_mean = mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    let mut order: Vec<usize> = subset.to_vec();
    order.sort_unstable();
    if p == 0 {
        return Ok(FitResult {
            intercept: y_mean,
            coefficients: Vec::new(),
            rss: dot(&yc, &yc),
            selected: Vec::new(),
            n_obs: n,
            hit_iteration_cap: false,
        });
    }

    let x_means: Vec<f64> = order.iter().map(|&j| mean(x.columns[j])).collect();
    let centered: Vec<Vec<f64>> = order
        .iter()
        .zip(&x_means)
        .map(|(&j, &mu)| x.columns[j].iter().map(|v| v - mu).collect())
        .collect();
    let refs: Vec<&[f64]> = centered.iter().map(Vec::as_slice).collect();
    let qr = Qr::factor(&refs).map_err(|bad| {
        Error::RankDeficient(bad.iter().map(|&k| x.names[order[k]].clone()).collect())
    })?;
    let ls = qr.solve(&yc);

    let rss = dot(&ls.residuals, &ls.residuals);
    let df = (n - p - 1) as f64;
    let sigma2 = rss / df;
    let mut coefficients = Vec::with_capacity(p);
    for (k, &j) in order.iter().enumerate() {
        let estimate = ls.coefficients[k];
        let se = (sigma2 * ls.inverse_gram_diag[k]).sqrt();
        let t = if se > 0.0 {
            estimate / se
        } else if estimate == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(estimate)
        };
        coefficients.push(Coefficient {
            name: x.names[j].clone(),
            estimate,
            std_error: Some(se),
            t_stat: Some(t),
            p_value: Some(student_t_sf(t, df)?),
        });
    }
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_means)
            .map(|(c, mu)| c.estimate * mu)
            .sum::<f64>();
    Ok(FitResult {
        intercept,
        selected: coefficients.iter().map(|c| c.name.clone()).collect(),
        coefficients,
        rss,
        n_obs: n,
        hit_iteration_cap: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn names(k: usize) -> Vec<String> {
        (1..=k).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn noiseless_line_is_recovered() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        let cols = [x.as_slice()];
        let n = names(1);
        let fit = ols_fit(Design::new(&cols, &n).unwrap(), &y).unwrap();
        assert!((fit.intercept - 3.0).abs() < 1e-10);
        assert!((fit.coefficients[0].estimate - 2.0).abs() < 1e-10);
        assert!(fit.rss < 1e-10);
    }

    #[test]
    fn hand_solved_three_points() {
        let x = [1.0, 2.0, 3.0];
        let y = [1.0, 2.0, 4.0];
        let cols = [x.as_slice()];
        let n = names(1);
        let fit = ols_fit(Design::new(&cols, &n).unwrap(), &y).unwrap();
        assert!((fit.coefficients[0].estimate - 1.5).abs() < 1e-12);
        assert!((fit.intercept + 2.0 / 3.0).abs() < 1e-12);
        // residuals [1/6, -1/3, 1/6]
        assert!((fit.rss - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn noise_slope_is_not_significant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let cols = [x.as_slice()];
        let n = names(1);
        let fit = ols_fit(Design::new(&cols, &n).unwrap(), &y).unwrap();
        let p = fit.coefficients[0].p_value.unwrap();
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn collinear_columns_are_named() {
        let a = [1.0, 2.0, 3.0, 4.0, 6.0];
        let b = [2.0, 1.0, 0.0, 3.0, 1.0];
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
        let y = [1.0, 0.0, 2.0, 1.0, 5.0];
        let cols = [a.as_slice(), &b, &c];
        let n = names(3);
        let err = ols_fit(Design::new(&cols, &n).unwrap(), &y).unwrap_err();
        assert_eq!(err, Error::RankDeficient(vec!["x3".into()]));
    }

    #[test]
    fn constant_predictor_is_rank_deficient() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let k = [5.0; 4];
        let y = [1.0, 3.0, 2.0, 5.0];
        let cols = [a.as_slice(), &k];
        let n = names(2);
        assert!(matches!(
            ols_fit(Design::new(&cols, &n).unwrap(), &y),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn too_few_rows() {
        let a = [1.0, 2.0];
        let y = [1.0, 3.0];
        let cols = [a.as_slice()];
        let n = names(1);
        assert!(matches!(
            ols_fit(Design::new(&cols, &n).unwrap(), &y),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn residuals_orthogonal_to_predictors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = 200;
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..m).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = (0..m)
            .map(|i| cols[0][i] - 0.5 * cols[2][i] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let n = names(4);
        let fit = ols_fit(Design::new(&refs, &n).unwrap(), &y).unwrap();
        let resid: Vec<f64> = (0..m)
            .map(|i| {
                y[i] - fit.intercept
                    - (0..4)
                        .map(|j| fit.coefficients[j].estimate * cols[j][i])
                        .sum::<f64>()
            })
            .collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
        for c in &cols {
            assert!(dot(&resid, c).abs() < 1e-8);
        }
        assert!((dot(&resid, &resid) - fit.rss).abs() < 1e-8);
    }
}
