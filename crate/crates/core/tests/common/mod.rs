//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the library's numerics.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn data_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

// ---------------------------------------------------------------- graphs

pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    let density: f64 = rng.random_range(0.1..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < density {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for &(u, v) in edges {
        a[(u, v)] = 1.0;
    }
    a
}

/// Spectral radius as the largest over the diagonal blocks of the strongly
/// connected components, found from the transitive closure. The spectrum of
/// the whole matrix is the union of the blocks' spectra, and each irreducible
/// block has a simple Perron root, so this stays accurate when the full
/// matrix has a defective top eigenvalue.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] != 0.0).collect())
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
            }
        }
    }
    let mut rho = 0.0f64;
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] || !reach[i][i] {
            continue;
        }
        let block: Vec<usize> = (0..n)
            .filter(|&j| j == i || (reach[i][j] && reach[j][i]))
            .collect();
        for &j in &block {
            seen[j] = true;
        }
        let sub = DMatrix::from_fn(block.len(), block.len(), |r, c| a[(block[r], block[c])]);
        rho = rho.max(
            eigenvalues(&sub)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
    }
    rho
}

/// Dense eigenvalues via a capped Schur iteration. If the shifted QR stalls
/// (it can cycle on some 0/1 matrices) it is rerun on an orthogonally
/// similar matrix, which has the same spectrum.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = a.nrows();
    let mut r = rng(0x5c4u64);
    let mut m = a.clone();
    for _ in 0..20 {
        if let Some(schur) = Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
            return schur.complex_eigenvalues().iter().cloned().collect();
        }
        let g = DMatrix::from_fn(n, n, |_, _| normals(&mut r, 1)[0]);
        let q = g.qr().q();
        m = q.transpose() * a * &q;
    }
    panic!("Schur iteration failed on {a}");
}

/// Algebraic multiplicity of the real eigenvalue `rho`.
pub fn multiplicity(a: &DMatrix<f64>, rho: f64) -> usize {
    eigenvalues(a)
        .iter()
        .filter(|z| (z.re - rho).abs() < 1e-6 && z.im.abs() < 1e-6)
        .count()
}

fn max_normalize(v: &DVector<f64>) -> Vec<f64> {
    let top = v.iter().cloned().fold(0.0, f64::max);
    v.iter().map(|x| x / top).collect()
}

/// Projection of the all-ones vector on the top eigenspace of a symmetric
/// matrix, max-normalized; zeros when the top eigenvalue is 0.
fn top_projection(s: DMatrix<f64>, zero_when_null: bool) -> Vec<f64> {
    let n = s.nrows();
    let eig = SymmetricEigen::new(s);
    let top = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if zero_when_null && top < 1e-9 {
        return vec![0.0; n];
    }
    let ones = DVector::from_element(n, 1.0);
    let mut proj = DVector::zeros(n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > top - 1e-8 * top.abs().max(1.0) {
            let v = eig.eigenvectors.column(k);
            proj += v * v.dot(&ones);
        }
    }
    max_normalize(&proj)
}

fn solve(m: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    m.lu().solve(&b).expect("nonsingular system")
}

pub struct OracleScores {
    pub degree: Vec<f64>,
    pub pagerank: Vec<f64>,
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
    pub eigen: Vec<f64>,
    pub eigen_fallback: bool,
    pub betweenness: Vec<f64>,
    pub closeness: Vec<f64>,
    pub alpha: Vec<f64>,
    pub power: Vec<f64>,
}

/// Every simple path from `s` to `t`, as node lists.
fn simple_paths(n: usize, a: &DMatrix<f64>, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(
        n: usize,
        a: &DMatrix<f64>,
        t: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for v in 0..n {
            if a[(u, v)] != 0.0 && !path.contains(&v) {
                path.push(v);
                walk(n, a, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(n, a, t, &mut vec![s], &mut out);
    out
}

pub fn centrality_oracle(
    n: usize,
    edges: &[(usize, usize)],
    damping: f64,
    attenuation: f64,
    beta: f64,
) -> OracleScores {
    let a = adjacency(n, edges);
    let at = a.transpose();
    let ones = DVector::from_element(n, 1.0);
    let nf = n as f64;

    let degree = (0..n).map(|u| a.row(u).sum() + a.column(u).sum()).collect();

    let mut p = DMatrix::zeros(n, n);
    for u in 0..n {
        let out = a.row(u).sum();
        for v in 0..n {
            p[(u, v)] = if out == 0.0 {
                1.0 / nf
            } else {
                a[(u, v)] / out
            };
        }
    }
    let pr = solve(
        DMatrix::identity(n, n) - p.transpose() * damping,
        &ones * ((1.0 - damping) / nf),
    );
    let pr_sum = pr.sum();
    let pagerank = pr.iter().map(|v| v / pr_sum).collect();

    let hub = top_projection(&a * &at, true);
    let authority = top_projection(&at * &a, true);

    let rho = spectral_radius(&a);
    let (eigen, eigen_fallback) = if rho > 0.0 && multiplicity(&a, rho) == 1 {
        let shifted = &at - DMatrix::identity(n, n) * rho;
        let svd = shifted.svd(true, true);
        let v_t = svd.v_t.unwrap();
        let k = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .unwrap()
            .0;
        let mut v: DVector<f64> = v_t.row(k).transpose();
        if v.sum() < 0.0 {
            v = -v;
        }
        (max_normalize(&v), false)
    } else {
        (top_projection(&a + &at, false), true)
    };

    let mut betweenness = vec![0.0; n];
    let mut closeness = vec![0.0; n];
    for s in 0..n {
        let mut reached = 1usize;
        let mut dist_sum = 0usize;
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = simple_paths(n, &a, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            reached += 1;
            dist_sum += shortest - 1;
            let geodesics: Vec<&Vec<usize>> =
                paths.iter().filter(|p| p.len() == shortest).collect();
            let total = geodesics.len() as f64;
            for (v, b) in betweenness.iter_mut().enumerate() {
                if v != s && v != t {
                    let through = geodesics.iter().filter(|p| p.contains(&v)).count();
                    *b += through as f64 / total;
                }
            }
        }
        if reached > 1 {
            let r = (reached - 1) as f64;
            closeness[s] = r / dist_sum as f64 * r / (nf - 1.0);
        }
    }

    let radius = if rho > 0.0 { rho } else { 1.0 };
    let katz = solve(
        DMatrix::identity(n, n) - &at * (attenuation / radius),
        ones.clone(),
    );
    let mut c = solve(DMatrix::identity(n, n) - &a * (beta / radius), &a * &ones);
    let sq = c.norm_squared();
    if sq > 0.0 {
        c *= (nf / sq).sqrt();
    }

    OracleScores {
        degree,
        pagerank,
        hub,
        authority,
        eigen,
        eigen_fallback,
        betweenness,
        closeness,
        alpha: katz.iter().cloned().collect(),
        power: c.iter().cloned().collect(),
    }
}

// ------------------------------------------------------------ regression

/// `P(|T| > t)` for Student t with `df` degrees of freedom, by Simpson's rule
/// on `t = sqrt(df) tan(theta)`, where the density in `theta` is
/// proportional to `cos(theta)^(df - 1)`.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let f = |th: f64| th.cos().powf(df - 1.0);
    let simpson = |lo: f64, hi: f64| {
        let steps = 4000;
        let h = (hi - lo) / steps as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..steps {
            acc += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let half = std::f64::consts::FRAC_PI_2;
    let theta = (t.abs() / df.sqrt()).atan();
    simpson(theta, half) / simpson(0.0, half)
}

pub struct RefFit {
    pub rss: f64,
    /// Two-sided p-values in subset order.
    pub p_values: Vec<f64>,
}

/// Normal-equation OLS with intercept; `None` when the design is singular
/// or leaves no residual degrees of freedom.
pub fn ref_ols(cols: &[Vec<f64>], subset: &[usize], y: &[f64]) -> Option<RefFit> {
    let n = y.len();
    let p = subset.len();
    if n < p + 2 {
        return None;
    }
    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    if p == 0 {
        return Some(RefFit {
            rss: yc.norm_squared(),
            p_values: Vec::new(),
        });
    }
    let x = DMatrix::from_fn(n, p, |i, k| {
        let c = &cols[subset[k]];
        c[i] - c.iter().sum::<f64>() / nf
    });
    let gram = x.transpose() * &x;
    let chol = gram.clone().cholesky()?;
    let inv = chol.inverse();
    let b = &inv * (x.transpose() * &yc);
    // reject near-singular designs the way a rank-revealing solve would
    let diag_min = (0..p).map(|k| gram[(k, k)]).fold(f64::INFINITY, f64::min);
    let l = chol.l();
    let pivot_min = (0..p)
        .map(|k| l[(k, k)].powi(2))
        .fold(f64::INFINITY, f64::min);
    if pivot_min <= 1e-18 * diag_min {
        return None;
    }
    let resid = &yc - &x * &b;
    let rss = resid.norm_squared();
    let df = (n - p - 1) as f64;
    let sigma2 = rss / df;
    let p_values = (0..p)
        .map(|k| {
            let se = (sigma2 * inv[(k, k)]).sqrt();
            t_two_sided(b[k] / se, df)
        })
        .collect();
    Some(RefFit { rss, p_values })
}

/// Reference p-value search; returns the selected indices, sorted.
///
/// Entry: the excluded column with the smallest p-value (lowest index on
/// ties) enters if p <= p_enter. Exit (stepwise only): while the included
/// column with the largest p-value has p >= p_exit, drop it. Rounds repeat
/// until nothing changes, at most `2d` rounds (stepwise) or `d + 1`
/// (forward).
pub fn ref_p_select(cols: &[Vec<f64>], y: &[f64], p_enter: f64, p_exit: Option<f64>) -> Vec<usize> {
    let d = cols.len();
    let cap = if p_exit.is_some() {
        2 * d.max(1)
    } else {
        d + 1
    };
    let mut included: Vec<usize> = Vec::new();
    for _ in 0..cap {
        let mut changed = false;
        let mut best: Option<(usize, f64)> = None;
        for j in (0..d).filter(|j| !included.contains(j)) {
            let mut trial = included.clone();
            trial.push(j);
            if let Some(fit) = ref_ols(cols, &trial, y) {
                let p = *fit.p_values.last().unwrap();
                if best.is_none_or(|(_, bp)| p < bp) {
                    best = Some((j, p));
                }
            }
        }
        if let Some((j, p)) = best {
            if p <= p_enter {
                included.push(j);
                changed = true;
            }
        }
        if let Some(p_exit) = p_exit {
            loop {
                let fit = ref_ols(cols, &included, y).expect("accepted model stays fittable");
                let mut worst: Option<(usize, f64)> = None;
                let mut order: Vec<(usize, f64)> =
                    included.iter().copied().zip(fit.p_values).collect();
                order.sort_by_key(|&(j, _)| j);
                for (j, p) in order {
                    if worst.is_none_or(|(_, wp)| p > wp) {
                        worst = Some((j, p));
                    }
                }
                match worst {
                    Some((j, p)) if p >= p_exit => {
                        included.retain(|&k| k != j);
                        changed = true;
                    }
                    _ => break,
                }
            }
        }
        if !changed {
            break;
        }
    }
    included.sort_unstable();
    included
}

/// `n ln(RSS / n) + 2 (p + 1)` with RSS floored at `1e-14 * TSS`.
pub fn ref_aic(rss: f64, n: usize, p: usize, tss: f64) -> f64 {
    let nf = n as f64;
    nf * (rss.max(1e-14 * tss) / nf).ln() + 2.0 * (p as f64 + 1.0)
}

/// Smallest AIC over every subset that can be fitted.
pub fn exhaustive_best_aic(cols: &[Vec<f64>], y: &[f64]) -> f64 {
    let d = cols.len();
    let n = y.len();
    let tss = ref_ols(cols, &[], y).unwrap().rss;
    (0u32..1 << d)
        .filter_map(|mask| {
            let subset: Vec<usize> = (0..d).filter(|j| mask >> j & 1 == 1).collect();
            ref_ols(cols, &subset, y).map(|f| ref_aic(f.rss, n, subset.len(), tss))
        })
        .fold(f64::INFINITY, f64::min)
}

/// A random regression instance with correlated predictors and a sparse,
/// partly weak signal.
pub fn selection_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = rng.random_range(3..=8);
    let n = rng.random_range(30..=90);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut c = normals(rng, n);
        if j > 0 && rng.random::<f64>() < 0.5 {
            let rho: f64 = rng.random_range(-0.7..0.7);
            for (v, prev) in c.iter_mut().zip(&cols[j - 1]) {
                *v += rho * prev;
            }
        }
        cols.push(c);
    }
    let weights: Vec<f64> = (0..d)
        .map(|_| [0.0, 0.0, 0.15, 0.3, 0.6, 1.0][rng.random_range(0..6)])
        .collect();
    let noise = normals(rng, n);
    let y = (0..n)
        .map(|i| noise[i] + (0..d).map(|j| weights[j] * cols[j][i]).sum::<f64>())
        .collect();
    (cols, y)
}

// --------------------------------------------------------------- metrics

/// Pair-counting adjusted Rand index over all `m (m - 1) / 2` pairs.
pub fn ari_oracle(a: &[usize], b: &[usize]) -> f64 {
    let m = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for j in i + 1..m {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            if sa {
                in_a += 1.0;
            }
            if sb {
                in_b += 1.0;
            }
            if sa && sb {
                both += 1.0;
            }
        }
    }
    let total = (m * (m - 1) / 2) as f64;
    let expected = in_a * in_b / total;
    let max = (in_a + in_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// Davies-Bouldin index straight from its definition.
pub fn dbi_oracle(rows: &[Vec<f64>], labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let dim = rows[0].len();
    let members: Vec<Vec<DVector<f64>>> = (0..k)
        .map(|c| {
            rows.iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| DVector::from_column_slice(r))
                .collect()
        })
        .collect();
    let centroid: Vec<DVector<f64>> = members
        .iter()
        .map(|pts| pts.iter().fold(DVector::zeros(dim), |acc, p| acc + p) / pts.len() as f64)
        .collect();
    let scatter: Vec<f64> = members
        .iter()
        .zip(&centroid)
        .map(|(pts, c)| pts.iter().map(|p| (p - c).norm()).sum::<f64>() / pts.len() as f64)
        .collect();
    (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| j != i)
                .map(|j| (scatter[i] + scatter[j]) / (&centroid[i] - &centroid[j]).norm())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .sum::<f64>()
        / k as f64
}

/// `per_blob` points around each centre with the given spread.
pub fn blobs(
    rng: &mut ChaCha8Rng,
    centres: &[Vec<f64>],
    per_blob: usize,
    spread: f64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..per_blob {
            let noise = normals(rng, centre.len());
            rows.push(
                centre
                    .iter()
                    .zip(noise)
                    .map(|(m, z)| m + spread * z)
                    .collect(),
            );
            truth.push(c);
        }
    }
    (rows, truth)
}

/// Centered columns with `X^T X = m I`, so each is standardized.
pub fn orthonormal_design(seed: u64, m: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let mut g = DMatrix::from_fn(m, d, |_, _| normals(&mut r, 1)[0]);
    for mut c in g.column_iter_mut() {
        let mu = c.mean();
        c.add_scalar_mut(-mu);
    }
    let q = g.qr().q();
    let scale = (m as f64).sqrt();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|j| q.column(j).iter().map(|v| v * scale).collect())
        .collect();
    let noise = normals(&mut r, m);
    let mut y: Vec<f64> = (0..m)
        .map(|i| 0.8 * cols[0][i] - 0.3 * cols[1][i] + 0.05 * cols[2][i] + noise[i])
        .collect();
    let mu = y.iter().sum::<f64>() / m as f64;
    y.iter_mut().for_each(|v| *v -= mu);
    (cols, y)
}

/// Random mixture fixture: 1-4 loose groups in 1-3 dimensions.
pub fn mixture_fixture(seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let dim = r.random_range(1..=3);
    let groups = r.random_range(1..=4);
    let centres: Vec<Vec<f64>> = (0..groups)
        .map(|_| normals(&mut r, dim).iter().map(|v| 4.0 * v).collect())
        .collect();
    let per = r.random_range(10..=40);
    let spread = r.random_range(0.5..2.0);
    blobs(&mut r, &centres, per, spread).0
}

pub fn three_blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let centres = vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]];
    blobs(&mut rng(seed), &centres, 50, 0.5)
}

/// `d` noise columns with a few planted linear dependencies.
pub fn planted_columns(seed: u64, m: usize, d: usize) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut cols: Vec<Vec<f64>> = (0..d).map(|_| normals(&mut r, m)).collect();
    for _ in 0..d / 3 {
        let (a, b) = (r.random_range(0..d), r.random_range(0..d));
        if a != b {
            let w: f64 = r.random_range(0.5..1.5);
            let src = cols[b].clone();
            for (v, s) in cols[a].iter_mut().zip(src) {
                *v += w * s;
            }
        }
    }
    cols
}
