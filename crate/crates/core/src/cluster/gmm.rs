//! Gaussian mixtures fitted by EM, and BIC-based model choice.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans_rows;
use crate::depnet::threads_from_env;
use crate::error::{Error, Result};
use crate::ingest::DataTable;

pub const DEFAULT_GMM_MAX_ITER: usize = 500;
pub const DEFAULT_GMM_TOL: f64 = 1e-7;
/// Lower bound on covariance eigenvalues, relative to the average column
/// variance.
pub const RIDGE: f64 = 1e-6;
pub const DEFAULT_K_MAX: usize = 9;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const MIN_COMPONENT_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceType {
    /// One variance per component (`sigma^2 I`).
    Spherical,
    /// Per-dimension variances per component.
    Diagonal,
    /// Unrestricted covariance per component.
    Full,
}

impl CovarianceType {
    pub const ALL: [CovarianceType; 3] = [
        CovarianceType::Spherical,
        CovarianceType::Diagonal,
        CovarianceType::Full,
    ];

    /// Free covariance parameters per component in `dim` dimensions.
    pub fn params_per_component(self, dim: usize) -> usize {
        match self {
            CovarianceType::Spherical => 1,
            CovarianceType::Diagonal => dim,
            CovarianceType::Full => dim * (dim + 1) / 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CovarianceType::Spherical => "spherical",
            CovarianceType::Diagonal => "diagonal",
            CovarianceType::Full => "full",
        }
    }
}

impl FromStr for CovarianceType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spherical" => Ok(CovarianceType::Spherical),
            "diagonal" | "diag" => Ok(CovarianceType::Diagonal),
            "full" => Ok(CovarianceType::Full),
            other => Err(Error::InvalidInput(format!(
                "unknown covariance type `{other}`"
            ))),
        }
    }
}

impl fmt::Display for CovarianceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmResult {
    pub k: usize,
    pub covariance_type: CovarianceType,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Row-major `dim x dim` covariance per component.
    pub covariances: Vec<Vec<Vec<f64>>>,
    pub log_likelihood: f64,
    pub n_params: usize,
    /// `2 log L - n_params ln m`; larger is better.
    pub bic: f64,
    pub labels: Vec<usize>,
    pub iterations: usize,
    pub n_obs: usize,
    /// Log-likelihood at each EM iteration.
    pub log_likelihood_history: Vec<f64>,
}

impl GmmResult {
    pub fn bic_from_fields(&self) -> f64 {
        bic(self.log_likelihood, self.n_params, self.n_obs)
    }
}

pub fn bic(log_likelihood: f64, n_params: usize, m: usize) -> f64 {
    2.0 * log_likelihood - n_params as f64 * (m as f64).ln()
}

pub fn n_params(k: usize, dim: usize, cov: CovarianceType) -> usize {
    (k - 1) + k * dim + k * cov.params_per_component(dim)
}

struct Component {
    weight: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl Component {
    fn new(weight: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let chol = Cholesky::new(cov.clone())
            .ok_or_else(|| Error::Singular("mixture covariance".into()))?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::Singular("mixture covariance".into()));
        }
        Ok(Self {
            weight,
            mean,
            cov,
            chol,
            log_det,
        })
    }

    fn log_density(&self, x: &DVector<f64>) -> f64 {
        let diff = x - &self.mean;
        let z = self
            .chol
            .l()
            .solve_lower_triangular(&diff)
            .expect("cholesky factor is nonsingular");
        let dim = x.len() as f64;
        -0.5 * (dim * LN_2PI + self.log_det + z.norm_squared())
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Responsibilities and total log-likelihood under `comps`.
fn e_step(data: &[DVector<f64>], comps: &[Component]) -> (Vec<Vec<f64>>, f64) {
    let mut total = 0.0;
    let mut resp = Vec::with_capacity(data.len());
    for x in data {
        let logs: Vec<f64> = comps
            .iter()
            .map(|c| c.weight.ln() + c.log_density(x))
            .collect();
        let lse = log_sum_exp(&logs);
        total += lse;
        resp.push(logs.iter().map(|l| (l - lse).exp()).collect());
    }
    (resp, total)
}

/// Raises every eigenvalue of a symmetric matrix to at least `floor`. This is
/// the exact maximizer of the Gaussian likelihood over covariances whose
/// eigenvalues are bounded below, so EM stays monotone.
fn floor_eigenvalues(cov: DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(cov.clone());
    if eig.eigenvalues.iter().all(|&v| v >= floor) {
        return cov;
    }
    let clipped = eig.eigenvalues.map(|v| v.max(floor));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    (&out + out.transpose()) * 0.5
}

fn m_step(
    data: &[DVector<f64>],
    resp: &[Vec<f64>],
    k: usize,
    cov_type: CovarianceType,
    ridge: f64,
) -> Result<Vec<Component>> {
    let m = data.len();
    let dim = data[0].len();
    let mut comps = Vec::with_capacity(k);
    for c in 0..k {
        let nk: f64 = resp.iter().map(|r| r[c]).sum();
        if nk < MIN_COMPONENT_WEIGHT * m as f64 {
            return Err(Error::Singular(format!(
                "mixture component {c} has no mass"
            )));
        }
        let mut mean = DVector::zeros(dim);
        for (x, r) in data.iter().zip(resp) {
            mean.axpy(r[c], x, 1.0);
        }
        mean /= nk;
        let mut scatter = DMatrix::zeros(dim, dim);
        for (x, r) in data.iter().zip(resp) {
            let diff = x - &mean;
            scatter.ger(r[c], &diff, &diff, 1.0);
        }
        scatter /= nk;
        let cov = match cov_type {
            CovarianceType::Full => {
                floor_eigenvalues((&scatter + scatter.transpose()) * 0.5, ridge)
            }
            CovarianceType::Diagonal => {
                DMatrix::from_diagonal(&scatter.diagonal().map(|v| v.max(ridge)))
            }
            CovarianceType::Spherical => {
                DMatrix::identity(dim, dim) * (scatter.trace() / dim as f64).max(ridge)
            }
        };
        comps.push(Component::new(nk / m as f64, mean, cov)?);
    }
    Ok(comps)
}

/// Mixture of `k` Gaussians by EM from a k-means start.
pub fn gmm_em(
    s: &DataTable,
    k: usize,
    cov_type: CovarianceType,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<GmmResult> {
    gmm_em_rows(&s.rows(), k, cov_type, seed, max_iter, tol)
}

pub fn gmm_em_rows(
    rows: &[Vec<f64>],
    k: usize,
    cov_type: CovarianceType,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<GmmResult> {
    let m = rows.len();
    if k < 1 || k > m {
        return Err(Error::OutOfRange(format!("k = {k} for {m} rows")));
    }
    let dim = rows[0].len();
    if cov_type == CovarianceType::Full && m <= dim {
        return Err(Error::InvalidInput(format!(
            "full covariance needs more rows ({m}) than dimensions ({dim})"
        )));
    }
    let data: Vec<DVector<f64>> = rows.iter().map(|r| DVector::from_column_slice(r)).collect();
    let avg_var = (0..dim)
        .map(|j| {
            let mu = rows.iter().map(|r| r[j]).sum::<f64>() / m as f64;
            rows.iter().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / m as f64
        })
        .sum::<f64>()
        / dim as f64;
    let ridge = RIDGE * if avg_var > 0.0 { avg_var } else { 1.0 };

    let init = kmeans_rows(rows, k, 5, 100, seed)?;
    let hard: Vec<Vec<f64>> = init
        .labels
        .iter()
        .map(|&l| (0..k).map(|c| if c == l { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut comps = m_step(&data, &hard, k, cov_type, ridge)?;

    let mut history = Vec::new();
    let mut resp;
    let mut ll;
    loop {
        (resp, ll) = e_step(&data, &comps);
        history.push(ll);
        let n = history.len();
        if n >= 2 && (ll - history[n - 2]).abs() <= tol * (1.0 + ll.abs()) {
            break;
        }
        if n > max_iter {
            break;
        }
        comps = m_step(&data, &resp, k, cov_type, ridge)?;
    }

    let labels = resp
        .iter()
        .map(|r| {
            let mut best = 0;
            for c in 1..k {
                if r[c] > r[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    let n_params = n_params(k, dim, cov_type);
    Ok(GmmResult {
        k,
        covariance_type: cov_type,
        weights: comps.iter().map(|c| c.weight).collect(),
        means: comps
            .iter()
            .map(|c| c.mean.iter().cloned().collect())
            .collect(),
        covariances: comps
            .iter()
            .map(|c| {
                (0..dim)
                    .map(|i| (0..dim).map(|j| c.cov[(i, j)]).collect())
                    .collect()
            })
            .collect(),
        log_likelihood: ll,
        n_params,
        bic: bic(ll, n_params, m),
        labels,
        iterations: history.len() - 1,
        n_obs: m,
        log_likelihood_history: history,
    })
}

/// One cell of the model-selection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicEntry {
    pub k: usize,
    pub covariance_type: CovarianceType,
    pub bic: Option<f64>,
    pub log_likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSelection {
    pub best: GmmResult,
    pub table: Vec<BicEntry>,
}

/// Fits every `(k, type)` with `k` in `1..=k_max` concurrently and keeps the
/// largest BIC; earlier entries (smaller `k`, then type order) win ties.
pub fn select_gmm(
    s: &DataTable,
    k_max: usize,
    types: &[CovarianceType],
    seed: u64,
) -> Result<GmmSelection> {
    if k_max < 1 {
        return Err(Error::OutOfRange("k_max must be at least 1".into()));
    }
    if types.is_empty() {
        return Err(Error::InvalidInput("no covariance types given".into()));
    }
    let rows = s.rows();
    let k_top = k_max.min(rows.len());
    let grid: Vec<(usize, CovarianceType)> = (1..=k_top)
        .flat_map(|k| types.iter().map(move |&t| (k, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads_from_env().unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
    let fits: Vec<Result<GmmResult>> = pool.install(|| {
        grid.par_iter()
            .map(|&(k, t)| gmm_em_rows(&rows, k, t, seed, DEFAULT_GMM_MAX_ITER, DEFAULT_GMM_TOL))
            .collect()
    });

    let mut table = Vec::with_capacity(grid.len());
    let mut best: Option<GmmResult> = None;
    for (&(k, t), fit) in grid.iter().zip(fits) {
        match fit {
            Ok(fit) => {
                table.push(BicEntry {
                    k,
                    covariance_type: t,
                    bic: Some(fit.bic),
                    log_likelihood: Some(fit.log_likelihood),
                    error: None,
                });
                if best.as_ref().is_none_or(|b| fit.bic > b.bic) {
                    best = Some(fit);
                }
            }
            Err(e) => table.push(BicEntry {
                k,
                covariance_type: t,
                bic: None,
                log_likelihood: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let best = best.ok_or_else(|| Error::InvalidInput("every mixture fit failed".into()))?;
    Ok(GmmSelection { best, table })
}
