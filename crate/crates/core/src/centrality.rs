//! Node centrality on directed, unweighted graphs and Top-n ranking.
//!
//! Formulas, with `A[u][v] = 1` for an edge `u -> v` and `d` nodes:
//!
//! | measure     | definition |
//! |-------------|------------|
//! | degree      | in-degree + out-degree |
//! | pagerank    | power iteration, uniform teleport, dangling mass spread uniformly |
//! | hub         | principal eigenvector of `A A^T`, max-normalized |
//! | authority   | principal eigenvector of `A^T A`, max-normalized |
//! | eigen       | principal eigenvector of `A^T` (in-links), max-normalized; falls back to `A + A^T` when the directed spectrum is degenerate |
//! | betweenness | directed shortest-path betweenness, unnormalized |
//! | closeness   | `(r - 1) / sum(dist)` scaled by `(r - 1) / (d - 1)`, `r` = nodes reachable from `u` including `u` |
//! | alpha       | Katz: `x = (I - a A^T)^{-1} 1`, `a = attenuation / lambda_max` |
//! | power       | Bonacich: `c = (I - b A)^{-1} A 1`, `b = beta / lambda_max`, scaled so `sum c^2 = d` |
//!
//! `lambda_max` is the spectral radius of `A`, taken as 1 when it is zero
//! (edgeless or acyclic graphs). Eigenvector-type measures start from the
//! all-ones vector, so when the top eigenvalue is repeated they return the
//! projection of that vector onto the top eigenspace. Hub and authority of a
//! graph with no edges are all zero.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::depnet::DependencyNetwork;
use crate::error::{Error, Result};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_ATTENUATION: f64 = 0.85;
pub const DEFAULT_BETA: f64 = 0.85;

const PAGERANK_TOL: f64 = 1e-10;
const PAGERANK_MAX_ITER: usize = 1000;
const EIGEN_TOL: f64 = 1e-10;
const EIGEN_MAX_ITER: usize = 100_000;
const LINEAR_TOL: f64 = 1e-13;
const LINEAR_MAX_ITER: usize = 100_000;
const RADIUS_TOL: f64 = 1e-13;
const RADIUS_MAX_ITER: usize = 1_000_000;
/// Relative gap under which two component spectral radii count as equal.
const RADIUS_TIE: f64 = 1e-9;

/// Directed graph stored as adjacency lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    n: usize,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a graph on `n` nodes. Duplicate edges are merged; self-loops
    /// are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop on node {u}")));
            }
            if !out[u].contains(&v) {
                out[u].push(v);
                inc[v].push(u);
            }
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_unstable();
        }
        Ok(Self { n, out, inc })
    }

    pub fn from_network(net: &DependencyNetwork) -> Result<Self> {
        Self::new(net.node_count(), &net.edges)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// `y = A x`: `y[u] = sum over u -> v of x[v]`.
    fn mul_a(&self, x: &[f64]) -> Vec<f64> {
        self.out
            .iter()
            .map(|vs| vs.iter().map(|&v| x[v]).sum())
            .collect()
    }

    /// `y = A^T x`: `y[v] = sum over u -> v of x[u]`.
    fn mul_at(&self, x: &[f64]) -> Vec<f64> {
        self.inc
            .iter()
            .map(|us| us.iter().map(|&u| x[u]).sum())
            .collect()
    }

    /// Strongly connected components (Tarjan, iterative), each sorted.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comps = Vec::new();
        let mut next = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&(u, pos)) = work.last() {
                if pos < self.out[u].len() {
                    let v = self.out[u][pos];
                    if let Some(top) = work.last_mut() {
                        top.1 += 1;
                    }
                    if index[v] == usize::MAX {
                        index[v] = next;
                        low[v] = next;
                        next += 1;
                        stack.push(v);
                        on_stack[v] = true;
                        work.push((v, 0));
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                } else {
                    work.pop();
                    if let Some(&(parent, _)) = work.last() {
                        low[parent] = low[parent].min(low[u]);
                    }
                    if low[u] == index[u] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == u {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps.sort();
        comps
    }

    /// Spectral radius of each strongly connected component with at least
    /// one internal edge, paired with the component.
    fn component_radii(&self) -> Result<Vec<(Vec<usize>, f64)>> {
        let mut out = Vec::new();
        for comp in self.strongly_connected_components() {
            if comp.len() < 2 {
                continue;
            }
            out.push((comp.clone(), self.irreducible_radius(&comp)?));
        }
        Ok(out)
    }

    /// Perron root of the irreducible block on `comp`, from Collatz-Wielandt
    /// bounds on the primitive matrix `B + I`.
    fn irreducible_radius(&self, comp: &[usize]) -> Result<f64> {
        let mut local = vec![usize::MAX; self.n];
        for (k, &u) in comp.iter().enumerate() {
            local[u] = k;
        }
        let succ: Vec<Vec<usize>> = comp
            .iter()
            .map(|&u| {
                self.out[u]
                    .iter()
                    .filter(|&&v| local[v] != usize::MAX)
                    .map(|&v| local[v])
                    .collect()
            })
            .collect();
        let mut x = vec![1.0; comp.len()];
        for _ in 0..RADIUS_MAX_ITER {
            let y: Vec<f64> = succ
                .iter()
                .enumerate()
                .map(|(k, vs)| x[k] + vs.iter().map(|&v| x[v]).sum::<f64>())
                .collect();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (a, b) in y.iter().zip(&x) {
                let r = a / b;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let top = y.iter().cloned().fold(0.0, f64::max);
            x = y.iter().map(|v| v / top).collect();
            if hi - lo <= RADIUS_TOL * hi {
                return Ok(0.5 * (lo + hi) - 1.0);
            }
        }
        Err(Error::NonConvergence {
            measure: "spectral radius".into(),
            iterations: RADIUS_MAX_ITER,
        })
    }

    /// Spectral radius of the adjacency matrix, or 1 when it is zero.
    pub fn lambda_max(&self) -> Result<f64> {
        let rho = self
            .component_radii()?
            .iter()
            .map(|(_, r)| *r)
            .fold(0.0, f64::max);
        Ok(if rho > 0.0 { rho } else { 1.0 })
    }
}

/// Node-scoring function with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "lowercase")]
pub enum CentralityMeasure {
    Alpha { attenuation: f64 },
    Authority,
    Betweenness,
    Closeness,
    Degree,
    Eigen,
    Hub,
    Pagerank { damping: f64 },
    Power { beta: f64 },
}

impl CentralityMeasure {
    pub const NAMES: [&'static str; 9] = [
        "alpha",
        "authority",
        "betweenness",
        "closeness",
        "degree",
        "eigen",
        "hub",
        "pagerank",
        "power",
    ];

    /// All nine measures with default parameters.
    pub fn all() -> Vec<CentralityMeasure> {
        Self::NAMES
            .iter()
            .map(|n| n.parse().expect("known measure"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            CentralityMeasure::Alpha { .. } => "alpha",
            CentralityMeasure::Authority => "authority",
            CentralityMeasure::Betweenness => "betweenness",
            CentralityMeasure::Closeness => "closeness",
            CentralityMeasure::Degree => "degree",
            CentralityMeasure::Eigen => "eigen",
            CentralityMeasure::Hub => "hub",
            CentralityMeasure::Pagerank { .. } => "pagerank",
            CentralityMeasure::Power { .. } => "power",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CentralityMeasure::Pagerank { damping } if !(damping > 0.0 && damping < 1.0) => {
                Err(Error::OutOfRange(format!("pagerank damping {damping}")))
            }
            CentralityMeasure::Alpha { attenuation }
                if !(attenuation > 0.0 && attenuation < 1.0) =>
            {
                Err(Error::OutOfRange(format!(
                    "alpha attenuation {attenuation}"
                )))
            }
            CentralityMeasure::Power { beta } if !(beta.abs() < 1.0) => {
                Err(Error::OutOfRange(format!("power beta {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// Builds a measure from its name and optional parameter overrides; a
    /// parameter the measure does not take is an error.
    pub fn from_parts(
        name: &str,
        damping: Option<f64>,
        attenuation: Option<f64>,
        beta: Option<f64>,
    ) -> Result<Self> {
        let mut m: CentralityMeasure = name.parse()?;
        let mut unused = Vec::new();
        match &mut m {
            CentralityMeasure::Pagerank { damping: d } => *d = damping.unwrap_or(*d),
            _ if damping.is_some() => unused.push("damping"),
            _ => {}
        }
        match &mut m {
            CentralityMeasure::Alpha { attenuation: a } => *a = attenuation.unwrap_or(*a),
            _ if attenuation.is_some() => unused.push("attenuation"),
            _ => {}
        }
        match &mut m {
            CentralityMeasure::Power { beta: b } => *b = beta.unwrap_or(*b),
            _ if beta.is_some() => unused.push("beta"),
            _ => {}
        }
        if !unused.is_empty() {
            return Err(Error::InvalidInput(format!(
                "measure `{}` takes no {}",
                m.name(),
                unused.join(" or ")
            )));
        }
        m.validate()?;
        Ok(m)
    }

    /// Parameters as a JSON object (empty for parameterless measures).
    pub fn params_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("measure serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("measure");
        }
        v
    }
}

impl FromStr for CentralityMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "alpha" | "katz" => CentralityMeasure::Alpha {
                attenuation: DEFAULT_ATTENUATION,
            },
            "authority" => CentralityMeasure::Authority,
            "betweenness" => CentralityMeasure::Betweenness,
            "closeness" => CentralityMeasure::Closeness,
            "degree" => CentralityMeasure::Degree,
            "eigen" | "eigenvector" => CentralityMeasure::Eigen,
            "hub" => CentralityMeasure::Hub,
            "pagerank" => CentralityMeasure::Pagerank {
                damping: DEFAULT_DAMPING,
            },
            "power" | "bonacich" => CentralityMeasure::Power { beta: DEFAULT_BETA },
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown centrality measure `{other}`"
                )))
            }
        })
    }
}

impl fmt::Display for CentralityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scores of one measure with the stable descending ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub measure: CentralityMeasure,
    pub scores: Vec<f64>,
    /// Node indices by descending score, lower index first on ties.
    pub ranking: Vec<usize>,
    /// Eigen only: the directed spectrum was degenerate and the symmetrized
    /// graph was used.
    pub fallback_used: bool,
}

impl CentralityScores {
    pub fn new(measure: CentralityMeasure, scores: Vec<f64>, fallback_used: bool) -> Self {
        let ranking = stable_ranking(&scores);
        Self {
            measure,
            scores,
            ranking,
            fallback_used,
        }
    }

    /// JSON export keyed by node name.
    pub fn to_json(&self, names: &[String]) -> serde_json::Value {
        let scores: serde_json::Map<String, serde_json::Value> = names
            .iter()
            .zip(&self.scores)
            .map(|(n, s)| (n.clone(), serde_json::json!(s)))
            .collect();
        let ranking: Vec<&str> = self.ranking.iter().map(|&i| names[i].as_str()).collect();
        serde_json::json!({
            "measure": self.measure.name(),
            "params": self.measure.params_json(),
            "scores": scores,
            "ranking": ranking,
            "fallback_used": self.fallback_used,
        })
    }
}

/// Indices sorted by descending score, ascending index among equal scores.
pub fn stable_ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

/// First `n` names of the ranking.
pub fn rank_top_n(s: &CentralityScores, names: &[String], n: usize) -> Result<Vec<String>> {
    if n == 0 || n > s.ranking.len() {
        return Err(Error::OutOfRange(format!(
            "top-n {n} (must be between 1 and {})",
            s.ranking.len()
        )));
    }
    Ok(s.ranking[..n].iter().map(|&i| names[i].clone()).collect())
}

/// Computes `measure` on `g`.
pub fn compute(g: &Digraph, measure: CentralityMeasure) -> Result<CentralityScores> {
    measure.validate()?;
    if g.node_count() == 0 {
        return Err(Error::InvalidInput("graph has no nodes".into()));
    }
    let (scores, fallback) = match measure {
        CentralityMeasure::Degree => (degree(g), false),
        CentralityMeasure::Pagerank { damping } => (pagerank(g, damping)?, false),
        CentralityMeasure::Hub => (hits(g)?.0, false),
        CentralityMeasure::Authority => (hits(g)?.1, false),
        CentralityMeasure::Eigen => eigen(g)?,
        CentralityMeasure::Betweenness => (betweenness(g), false),
        CentralityMeasure::Closeness => (closeness(g), false),
        CentralityMeasure::Alpha { attenuation } => (alpha(g, attenuation)?, false),
        CentralityMeasure::Power { beta } => (power(g, beta)?, false),
    };
    Ok(CentralityScores::new(measure, scores, fallback))
}

pub fn degree(g: &Digraph) -> Vec<f64> {
    (0..g.n)
        .map(|u| (g.out[u].len() + g.inc[u].len()) as f64)
        .collect()
}

pub fn pagerank(g: &Digraph, damping: f64) -> Result<Vec<f64>> {
    let n = g.n as f64;
    let mut x = vec![1.0 / n; g.n];
    for _ in 0..PAGERANK_MAX_ITER {
        let dangling: f64 = (0..g.n)
            .filter(|&u| g.out[u].is_empty())
            .map(|u| x[u])
            .sum();
        let base = (1.0 - damping) / n + damping * dangling / n;
        let next: Vec<f64> = (0..g.n)
            .map(|v| {
                base + damping
                    * g.inc[v]
                        .iter()
                        .map(|&u| x[u] / g.out[u].len() as f64)
                        .sum::<f64>()
            })
            .collect();
        let change: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if change < PAGERANK_TOL {
            let total: f64 = x.iter().sum();
            return Ok(x.into_iter().map(|v| v / total).collect());
        }
    }
    Err(Error::NonConvergence {
        measure: "pagerank".into(),
        iterations: PAGERANK_MAX_ITER,
    })
}

/// Power iteration `x <- op(x) / max(op(x))` from the all-ones vector.
/// Returns `Ok(None)` when the iterate collapses to zero.
fn max_normalized_power<F>(n: usize, op: F, name: &str) -> Result<Option<Vec<f64>>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = vec![1.0; n];
    for _ in 0..EIGEN_MAX_ITER {
        let y = op(&x);
        let top = y.iter().cloned().fold(0.0, f64::max);
        if top <= 0.0 {
            return Ok(None);
        }
        let y: Vec<f64> = y.into_iter().map(|v| v / top).collect();
        let change = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        x = y;
        if change < EIGEN_TOL {
            return Ok(Some(x));
        }
    }
    Err(Error::NonConvergence {
        measure: name.into(),
        iterations: EIGEN_MAX_ITER,
    })
}

/// Hub and authority scores.
pub fn hits(g: &Digraph) -> Result<(Vec<f64>, Vec<f64>)> {
    let hub = max_normalized_power(g.n, |x| g.mul_a(&g.mul_at(x)), "hub")?;
    let auth = max_normalized_power(g.n, |x| g.mul_at(&g.mul_a(x)), "authority")?;
    Ok((
        hub.unwrap_or_else(|| vec![0.0; g.n]),
        auth.unwrap_or_else(|| vec![0.0; g.n]),
    ))
}

/// Eigenvector centrality on in-links; second value reports the fallback.
///
/// The directed problem is used only when exactly one strongly connected
/// component attains a positive spectral radius, which makes the Perron
/// eigenvalue simple. Otherwise, or if iteration fails, the symmetrized
/// graph `A + A^T` is used.
pub fn eigen(g: &Digraph) -> Result<(Vec<f64>, bool)> {
    let radii = g.component_radii()?;
    let rho = radii.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    let attaining = radii
        .iter()
        .filter(|(_, r)| (rho - r).abs() <= RADIUS_TIE * rho.max(1.0))
        .count();
    if rho > 0.0 && attaining == 1 {
        // A^T + I shares eigenvectors with A^T and has a unique dominant root
        let directed = max_normalized_power(
            g.n,
            |x| {
                let mut y = g.mul_at(x);
                y.iter_mut().zip(x).for_each(|(a, b)| *a += b);
                y
            },
            "eigen",
        );
        if let Ok(Some(x)) = directed {
            return Ok((x, false));
        }
    }
    let sym = max_normalized_power(
        g.n,
        |x| {
            let a = g.mul_a(x);
            let at = g.mul_at(x);
            (0..g.n).map(|i| a[i] + at[i] + x[i]).collect()
        },
        "eigen (symmetrized)",
    )?;
    Ok((sym.expect("shifted iterate stays positive"), true))
}

/// Breadth-first distances from `s` along out-edges (`usize::MAX` if
/// unreachable), with shortest-path counts and visit order.
fn bfs(g: &Digraph, s: usize) -> (Vec<usize>, Vec<f64>, Vec<usize>) {
    let mut dist = vec![usize::MAX; g.n];
    let mut sigma = vec![0.0; g.n];
    let mut order = Vec::with_capacity(g.n);
    let mut queue = VecDeque::new();
    dist[s] = 0;
    sigma[s] = 1.0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &v in &g.out[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
            if dist[v] == dist[u] + 1 {
                sigma[v] += sigma[u];
            }
        }
    }
    (dist, sigma, order)
}

/// Directed betweenness by single-source dependency accumulation.
pub fn betweenness(g: &Digraph) -> Vec<f64> {
    let mut cb = vec![0.0; g.n];
    for s in 0..g.n {
        let (dist, sigma, order) = bfs(g, s);
        let mut delta = vec![0.0; g.n];
        for &w in order.iter().rev() {
            for &v in &g.inc[w] {
                if dist[v] != usize::MAX && dist[v] + 1 == dist[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb
}

pub fn closeness(g: &Digraph) -> Vec<f64> {
    let n = g.n;
    (0..n)
        .map(|u| {
            let (dist, _, order) = bfs(g, u);
            let reached = order.len();
            if reached <= 1 {
                return 0.0;
            }
            let total: usize = order.iter().map(|&v| dist[v]).sum();
            let r = (reached - 1) as f64;
            (r / total as f64) * (r / (n - 1) as f64)
        })
        .collect()
}

/// Fixed-point iteration `x <- b + op(x)` for a contraction `op`.
fn solve_neumann<F>(b: Vec<f64>, op: F, name: &str) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = b.clone();
    for _ in 0..LINEAR_MAX_ITER {
        let next: Vec<f64> = op(&x).iter().zip(&b).map(|(a, c)| a + c).collect();
        let change = next
            .iter()
            .zip(&x)
            .map(|(a, c)| (a - c).abs())
            .fold(0.0, f64::max);
        let scale = next.iter().map(|v| v.abs()).fold(1.0, f64::max);
        x = next;
        if change <= LINEAR_TOL * scale {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        measure: name.into(),
        iterations: LINEAR_MAX_ITER,
    })
}

/// Katz centrality on in-links.
pub fn alpha(g: &Digraph, attenuation: f64) -> Result<Vec<f64>> {
    let a = attenuation / g.lambda_max()?;
    solve_neumann(
        vec![1.0; g.n],
        |x| g.mul_at(x).into_iter().map(|v| a * v).collect(),
        "alpha",
    )
}

/// Bonacich power centrality.
pub fn power(g: &Digraph, beta: f64) -> Result<Vec<f64>> {
    let b = beta / g.lambda_max()?;
    let c = solve_neumann(
        g.mul_a(&vec![1.0; g.n]),
        |x| g.mul_a(x).into_iter().map(|v| b * v).collect(),
        "power",
    )?;
    let sum_sq: f64 = c.iter().map(|v| v * v).sum();
    if sum_sq == 0.0 {
        return Ok(c);
    }
    let scale = (g.n as f64 / sum_sq).sqrt();
    Ok(c.into_iter().map(|v| v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn measure_from_parts() {
        assert_eq!(
            CentralityMeasure::from_parts("pagerank", Some(0.5), None, None).unwrap(),
            CentralityMeasure::Pagerank { damping: 0.5 }
        );
        assert_eq!(
            CentralityMeasure::from_parts("katz", None, None, None).unwrap(),
            CentralityMeasure::Alpha {
                attenuation: DEFAULT_ATTENUATION
            }
        );
        assert!(CentralityMeasure::from_parts("degree", None, None, Some(0.3)).is_err());
        assert!(CentralityMeasure::from_parts("alpha", None, Some(1.5), None).is_err());
    }

    fn cycle3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn three_cycle_is_uniform() {
        let g = cycle3();
        let pr = pagerank(&g, 0.85).unwrap();
        assert!(pr.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
        assert_eq!(degree(&g), vec![2.0; 3]);
        assert_eq!(betweenness(&g), vec![1.0; 3]);
        let (e, fallback) = eigen(&g).unwrap();
        assert!(!fallback);
        assert!(e.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn star_hits() {
        // leaves 1..=4 all point at hub node 0
        let g = Digraph::new(5, &[(1, 0), (2, 0), (3, 0), (4, 0)]).unwrap();
        let (hub, auth) = hits(&g).unwrap();
        assert_eq!(auth[0], 1.0);
        assert!(auth[1..].iter().all(|&a| a == 0.0));
        assert_eq!(hub[0], 0.0);
        assert!(hub[1..].iter().all(|&h| (h - 1.0).abs() < 1e-12));
    }

    #[test]
    fn dag_eigen_falls_back() {
        let g = Digraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let (e, fallback) = eigen(&g).unwrap();
        assert!(fallback);
        // path graph a-b-c: principal eigenvector (1, sqrt2, 1) / sqrt2
        assert!((e[1] - 1.0).abs() < 1e-9);
        assert!((e[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn lambda_max_of_edgeless_and_dag_is_one() {
        assert_eq!(Digraph::new(3, &[]).unwrap().lambda_max().unwrap(), 1.0);
        assert_eq!(
            Digraph::new(3, &[(0, 1), (0, 2)])
                .unwrap()
                .lambda_max()
                .unwrap(),
            1.0
        );
        let two_cycle = Digraph::new(2, &[(0, 1), (1, 0)]).unwrap();
        assert!((two_cycle.lambda_max().unwrap() - 1.0).abs() < 1e-12);
        let k3 = Digraph::new(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]).unwrap();
        assert!((k3.lambda_max().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closeness_handles_disconnection() {
        let g = Digraph::new(3, &[(0, 1)]).unwrap();
        let c = closeness(&g);
        assert_eq!(c, vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn tiny_graphs_have_zero_betweenness() {
        let g = Digraph::new(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(betweenness(&g), vec![0.0, 0.0]);
        assert_eq!(betweenness(&Digraph::new(1, &[]).unwrap()), vec![0.0]);
    }

    #[test]
    fn power_is_scaled_to_node_count() {
        let g = Digraph::new(4, &[(0, 1), (1, 2), (2, 0), (3, 0)]).unwrap();
        let c = power(&g, 0.85).unwrap();
        let ss: f64 = c.iter().map(|v| v * v).sum();
        assert!((ss - 4.0).abs() < 1e-12);
    }

    #[test]
    fn ranking_ties_go_to_lower_index() {
        assert_eq!(stable_ranking(&[1.0, 2.0, 2.0, 0.5]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn top_n_bounds_and_prefix() {
        let s = CentralityScores::new(CentralityMeasure::Degree, vec![3.0, 1.0, 2.0], false);
        let n = names(3);
        assert_eq!(rank_top_n(&s, &n, 3).unwrap(), vec!["v0", "v2", "v1"]);
        assert_eq!(rank_top_n(&s, &n, 1).unwrap(), vec!["v0"]);
        assert!(rank_top_n(&s, &n, 0).is_err());
        assert!(rank_top_n(&s, &n, 4).is_err());
    }

    #[test]
    fn invalid_parameters() {
        let g = cycle3();
        for m in [
            CentralityMeasure::Pagerank { damping: 1.0 },
            CentralityMeasure::Alpha { attenuation: 0.0 },
            CentralityMeasure::Alpha { attenuation: 1.2 },
            CentralityMeasure::Power { beta: -1.0 },
        ] {
            assert!(matches!(compute(&g, m), Err(Error::OutOfRange(_))), "{m:?}");
        }
    }

    #[test]
    fn graph_rejects_self_loops() {
        assert!(Digraph::new(2, &[(1, 1)]).is_err());
        assert!(Digraph::new(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn scc_partition() {
        let g = Digraph::new(5, &[(0, 1), (1, 0), (1, 2), (3, 4), (4, 3)]).unwrap();
        assert_eq!(
            g.strongly_connected_components(),
            vec![vec![0, 1], vec![2], vec![3, 4]]
        );
    }

    #[test]
    fn measure_names_parse() {
        for name in CentralityMeasure::NAMES {
            let m: CentralityMeasure = name.parse().unwrap();
            assert_eq!(m.name(), name);
        }
        assert!("foo".parse::<CentralityMeasure>().is_err());
    }

    #[test]
    fn json_export() {
        let g = cycle3();
        let s = compute(&g, CentralityMeasure::Pagerank { damping: 0.85 }).unwrap();
        let v = s.to_json(&names(3));
        assert_eq!(v["measure"], "pagerank");
        assert_eq!(v["params"]["damping"], 0.85);
        assert_eq!(v["ranking"][0], "v0");
        assert_eq!(v["fallback_used"], false);
    }
}
