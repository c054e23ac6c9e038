use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::DataTable;
use crate::linalg::squared_distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub wcss: f64,
    /// Lloyd iterations of the winning restart.
    pub iterations: usize,
    pub seed: u64,
    /// Within-cluster sum of squares after each centroid update of the
    /// winning restart.
    pub wcss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint {
    pub k: usize,
    pub wcss: f64,
}

/// Best-of-`restarts` Lloyd clustering from k-means++ seeding.
pub fn kmeans(
    s: &DataTable,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansResult> {
    kmeans_rows(&s.rows(), k, restarts, max_iter, seed)
}

pub fn kmeans_rows(
    rows: &[Vec<f64>],
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansResult> {
    let m = rows.len();
    if k < 1 || k > m {
        return Err(Error::OutOfRange(format!("k = {k} for {m} rows")));
    }
    if restarts < 1 {
        return Err(Error::OutOfRange("restarts must be at least 1".into()));
    }
    if max_iter < 1 {
        return Err(Error::OutOfRange("max_iter must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts {
        let init = plus_plus_seeds(rows, k, &mut rng);
        let run = lloyd(rows, init, max_iter, seed);
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Distance-weighted seeding: each new centre is drawn with probability
/// proportional to its squared distance from the nearest chosen centre.
fn plus_plus_seeds(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let m = rows.len();
    let mut centres = vec![rows[rng.random_range(0..m)].clone()];
    let mut nearest: Vec<f64> = rows
        .iter()
        .map(|r| squared_distance(r, &centres[0]))
        .collect();
    while centres.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = m - 1;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        let c = rows[pick].clone();
        for (n, r) in nearest.iter_mut().zip(rows) {
            *n = n.min(squared_distance(r, &c));
        }
        centres.push(c);
    }
    centres
}

fn nearest_centre(row: &[f64], centres: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centres.iter().enumerate() {
        let d = squared_distance(row, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Nearest-centre labels; every empty cluster takes the point farthest from
/// its centre among clusters that can spare one.
fn assign(rows: &[Vec<f64>], centres: &[Vec<f64>]) -> Vec<usize> {
    let k = centres.len();
    let mut labels = Vec::with_capacity(rows.len());
    let mut dist = Vec::with_capacity(rows.len());
    for row in rows {
        let (c, d) = nearest_centre(row, centres);
        labels.push(c);
        dist.push(d);
    }
    let mut sizes = vec![0usize; k];
    for &l in &labels {
        sizes[l] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..rows.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
            .expect("k <= m leaves a cluster with a spare point");
        sizes[labels[donor]] -= 1;
        labels[donor] = empty;
        sizes[empty] = 1;
        dist[donor] = 0.0;
    }
    labels
}

pub(crate) fn centroids_of(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
        .collect()
}

pub(crate) fn wcss_of(rows: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    rows.iter()
        .zip(labels)
        .map(|(r, &l)| squared_distance(r, &centroids[l]))
        .sum()
}

fn lloyd(rows: &[Vec<f64>], init: Vec<Vec<f64>>, max_iter: usize, seed: u64) -> KMeansResult {
    let k = init.len();
    let mut labels = assign(rows, &init);
    let mut history = Vec::new();
    let mut iterations = 0;
    let centroids = loop {
        iterations += 1;
        let centroids = centroids_of(rows, &labels, k);
        history.push(wcss_of(rows, &labels, &centroids));
        if iterations == max_iter {
            break centroids;
        }
        let next = assign(rows, &centroids);
        if next == labels {
            break centroids;
        }
        labels = next;
    };
    KMeansResult {
        k,
        wcss: *history.last().expect("one iteration"),
        labels,
        centroids,
        iterations,
        seed,
        wcss_history: history,
    }
}

/// Best WCSS for every `k` in `k_min..=k_max`.
pub fn elbow_curve(
    s: &DataTable,
    k_min: usize,
    k_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<ElbowPoint>> {
    let m = s.nrows();
    if k_min < 1 || k_min > k_max || k_max > m {
        return Err(Error::OutOfRange(format!(
            "k range {k_min}..={k_max} for {m} rows"
        )));
    }
    let rows = s.rows();
    (k_min..=k_max)
        .map(|k| {
            kmeans_rows(&rows, k, restarts, super::DEFAULT_MAX_ITER, seed)
                .map(|r| ElbowPoint { k, wcss: r.wcss })
        })
        .collect()
}
