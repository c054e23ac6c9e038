//! Clustering quality indices and the 2-D projection used for plots.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{standardize, DataTable};
use crate::linalg::squared_distance;

/// Cluster labels, dense in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Wraps labels that already use every value in `0..k`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&l| l + 1);
        let mut used = vec![false; k];
        for &l in &labels {
            used[l] = true;
        }
        if let Some(missing) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!(
                "labels are not dense: {missing} unused below {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    /// Renumbers arbitrary labels to `0..k` in order of first appearance.
    pub fn from_any<T: std::hash::Hash + Eq + Clone>(labels: &[T]) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let dense = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        Self {
            labels: dense,
            k: ids.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Davies-Bouldin index with Euclidean distances; lower is better.
pub fn davies_bouldin(s: &DataTable, p: &Partition) -> Result<f64> {
    davies_bouldin_rows(&s.rows(), p)
}

pub fn davies_bouldin_rows(rows: &[Vec<f64>], p: &Partition) -> Result<f64> {
    if rows.len() != p.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows for {} labels",
            rows.len(),
            p.len()
        )));
    }
    let k = p.k();
    if k < 2 {
        return Err(Error::InvalidInput(
            "Davies-Bouldin needs at least two clusters".into(),
        ));
    }
    let centroids = crate::cluster::centroids_of(rows, p.labels(), k);
    let mut scatter = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in rows.iter().zip(p.labels()) {
        scatter[l] += squared_distance(row, &centroids[l]).sqrt();
        counts[l] += 1;
    }
    for (s, c) in scatter.iter_mut().zip(&counts) {
        *s /= *c as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst: f64 = 0.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let sep = squared_distance(&centroids[i], &centroids[j]).sqrt();
            if sep == 0.0 {
                return Err(Error::CoincidentCentroids(i.min(j), i.max(j)));
            }
            worst = worst.max((scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

fn pairs(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index; 1 for identical partitions, about 0 by chance.
pub fn adjusted_rand(a: &Partition, b: &Partition) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "partitions have {} and {} labels",
            a.len(),
            b.len()
        )));
    }
    let mut table = vec![vec![0usize; b.k()]; a.k()];
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        table[x][y] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&n| pairs(n)).sum();
    let row_sum: f64 = table.iter().map(|r| pairs(r.iter().sum::<usize>())).sum();
    let col_sum: f64 = (0..b.k())
        .map(|j| pairs(table.iter().map(|r| r[j]).sum::<usize>()))
        .sum();
    let expected = row_sum * col_sum / pairs(a.len());
    let max_index = 0.5 * (row_sum + col_sum);
    let denom = max_index - expected;
    if denom == 0.0 || !denom.is_finite() {
        // both partitions trivial in the same way
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// Rows projected on the leading principal axes of the correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    /// `m` rows of `dims` coordinates.
    pub coordinates: Vec<Vec<f64>>,
    /// Share of total (standardized) variance per axis, descending.
    pub explained_variance_ratio: Vec<f64>,
    /// Unit loading vector per axis; its largest-magnitude entry is positive.
    pub loadings: Vec<Vec<f64>>,
}

/// Correlation-matrix PCA: columns are standardized, then projected on the
/// top `dims` eigenvectors.
pub fn pca_project(s: &DataTable, dims: usize) -> Result<PcaProjection> {
    let d = s.ncols();
    if d < 2 {
        return Err(Error::InvalidInput(format!(
            "PCA needs at least 2 columns, got {d}"
        )));
    }
    if dims < 1 || dims > d {
        return Err(Error::OutOfRange(format!(
            "{dims} components for {d} columns"
        )));
    }
    let (z, _) = standardize(s)?;
    let m = z.nrows();
    let zmat = DMatrix::from_fn(m, d, |i, j| z.column(j)[i]);
    let corr = (zmat.transpose() * &zmat) / m as f64;
    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut loadings = Vec::with_capacity(dims);
    let mut ratios = Vec::with_capacity(dims);
    for &idx in order.iter().take(dims) {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().cloned().collect();
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("non-empty loading");
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        ratios.push((eig.eigenvalues[idx] / d as f64).clamp(0.0, 1.0));
        loadings.push(v);
    }
    let coordinates = (0..m)
        .map(|i| {
            loadings
                .iter()
                .map(|v| (0..d).map(|j| z.column(j)[i] * v[j]).sum())
                .collect()
        })
        .collect();
    Ok(PcaProjection {
        coordinates,
        explained_variance_ratio: ratios,
        loadings,
    })
}
