//! Dependency-network construction.
//!
//! Each column is regressed on every other column with the chosen selection
//! method; the predictors kept by the regression for response `i` become the
//! parents of `i`. By default an edge runs from the response to each parent
//! (`i -> s`, "i depends on s"), so heavily depended-on variables collect
//! in-links.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{standardize, DataTable};
use crate::linalg::mean;
use crate::linmod::{fit_with, Design, SelectionMethod};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "DISCOVARS_THREADS";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeDirection {
    /// Response to each selected predictor.
    #[default]
    ChildToParent,
    /// Selected predictor to response.
    ParentToChild,
}

/// What one regression contributed to the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeFitSummary {
    pub node: String,
    pub selected: Vec<String>,
    pub rss: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hit_iteration_cap: bool,
}

/// Directed graph over the columns of a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencyNetwork {
    pub nodes: Vec<String>,
    /// Sorted, duplicate-free `(source, target)` index pairs.
    pub edges: Vec<(usize, usize)>,
    pub method: SelectionMethod,
    pub edge_direction: EdgeDirection,
    pub fits: Vec<NodeFitSummary>,
}

/// Whether to run the per-response regressions on a worker pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Parallel with at most this many workers; `None` reads
    /// [`THREADS_ENV`], then falls back to the number of CPUs.
    Parallel(Option<usize>),
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel(None)
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Builds the network with the default direction and a parallel pool.
pub fn build_network(t: &DataTable, method: &SelectionMethod) -> Result<DependencyNetwork> {
    build_network_with(t, method, EdgeDirection::default(), Execution::default())
}

pub fn build_network_with(
    t: &DataTable,
    method: &SelectionMethod,
    direction: EdgeDirection,
    execution: Execution,
) -> Result<DependencyNetwork> {
    method.validate()?;
    if t.ncols() < 3 {
        return Err(Error::InvalidInput(format!(
            "network construction needs at least 3 columns, got {}",
            t.ncols()
        )));
    }
    t.require_network_shape()?;
    // Lasso takes standardized predictors and a centered response on its own
    // scale, so the penalty is in response units as in glmnet. The OLS-based
    // methods are scale invariant but get the same check for constant columns.
    let (standardized, _) = standardize(t)?;
    let lasso = matches!(method, SelectionMethod::Lasso { .. });
    let predictors_from = if lasso { &standardized } else { t };

    let d = t.ncols();
    let fit_one = |i: usize| -> Result<NodeFitSummary> {
        let predictors: Vec<usize> = (0..d).filter(|&j| j != i).collect();
        let cols: Vec<&[f64]> = predictors
            .iter()
            .map(|&j| predictors_from.column(j))
            .collect();
        let names: Vec<String> = predictors.iter().map(|&j| t.names()[j].clone()).collect();
        let design = Design::new(&cols, &names)?;
        let response: Vec<f64> = if lasso {
            let mu = mean(t.column(i));
            t.column(i).iter().map(|v| v - mu).collect()
        } else {
            t.column(i).to_vec()
        };
        let fit = fit_with(method, design, &response).map_err(|e| Error::Regression {
            variable: t.names()[i].clone(),
            source: Box::new(e),
        })?;
        Ok(NodeFitSummary {
            node: t.names()[i].clone(),
            selected: fit.selected,
            rss: fit.rss,
            hit_iteration_cap: fit.hit_iteration_cap,
        })
    };

    let fits: Vec<NodeFitSummary> = match execution {
        Execution::Sequential => (0..d).map(fit_one).collect::<Result<_>>()?,
        Execution::Parallel(cap) => {
            let threads = cap.or_else(threads_from_env).unwrap_or(0);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))?;
            // collect() into Result stops handing out work after the first error
            pool.install(|| (0..d).into_par_iter().map(fit_one).collect::<Result<_>>())?
        }
    };

    let mut edges = BTreeSet::new();
    for (i, fit) in fits.iter().enumerate() {
        for name in &fit.selected {
            let s = t
                .index_of(name)
                .expect("selected predictor is a table column");
            debug_assert_ne!(i, s);
            edges.insert(match direction {
                EdgeDirection::ChildToParent => (i, s),
                EdgeDirection::ParentToChild => (s, i),
            });
        }
    }
    Ok(DependencyNetwork {
        nodes: t.names().to_vec(),
        edges: edges.into_iter().collect(),
        method: *method,
        edge_direction: direction,
        fits,
    })
}

impl DependencyNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Dense adjacency matrix, `a[i][j] = 1` for an edge `i -> j`.
    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let mut a = vec![vec![0.0; n]; n];
        for &(i, j) in &self.edges {
            a[i][j] = 1.0;
        }
        a
    }

    pub fn edge_density(&self) -> f64 {
        let n = self.nodes.len();
        if n < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (n * (n - 1)) as f64
    }

    /// `source,target` lines under a header, sorted by name pair.
    pub fn to_edge_list(&self) -> String {
        let mut pairs: Vec<(&str, &str)> = self
            .edges
            .iter()
            .map(|&(i, j)| (self.nodes[i].as_str(), self.nodes[j].as_str()))
            .collect();
        pairs.sort_unstable();
        let mut out = String::from("source,target\n");
        for (a, b) in pairs {
            out.push_str(&csv_field(a));
            out.push(',');
            out.push_str(&csv_field(b));
            out.push('\n');
        }
        out
    }

    /// JSON export: `{nodes, edges, method, params}` with name pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<[&str; 2]> = self
            .edges
            .iter()
            .map(|&(i, j)| [self.nodes[i].as_str(), self.nodes[j].as_str()])
            .collect();
        let mut params = serde_json::to_value(self.method).expect("method serializes");
        if let Some(obj) = params.as_object_mut() {
            obj.remove("method");
        }
        serde_json::json!({
            "nodes": self.nodes,
            "edges": edges,
            "method": self.method.name(),
            "params": params,
            "edge_direction": self.edge_direction,
        })
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Parses an edge list written by [`DependencyNetwork::to_edge_list`] back
/// into sorted index pairs over `nodes`.
pub fn parse_edge_list(text: &str, nodes: &[String]) -> Result<Vec<(usize, usize)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut edges = BTreeSet::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::InvalidInput(e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::InvalidInput("edge line needs two fields".into()));
        }
        let find = |name: &str| {
            nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node `{name}`")))
        };
        edges.insert((find(&rec[0])?, find(&rec[1])?));
    }
    Ok(edges.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(nodes: &[&str], edges: Vec<(usize, usize)>) -> DependencyNetwork {
        DependencyNetwork {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges,
            method: SelectionMethod::lasso(),
            edge_direction: EdgeDirection::ChildToParent,
            fits: Vec::new(),
        }
    }

    #[test]
    fn empty_edge_list_has_header_only() {
        assert_eq!(net(&["a", "b"], vec![]).to_edge_list(), "source,target\n");
    }

    #[test]
    fn single_edge_line() {
        assert_eq!(
            net(&["a", "b"], vec![(0, 1)]).to_edge_list(),
            "source,target\na,b\n"
        );
    }

    #[test]
    fn edge_list_is_sorted_by_name_and_round_trips() {
        let n = net(&["z", "b", "a,c"], vec![(0, 1), (1, 2), (2, 0), (1, 0)]);
        let text = n.to_edge_list();
        assert_eq!(text, "source,target\n\"a,c\",z\nb,\"a,c\"\nb,z\nz,b\n");
        let mut want = n.edges.clone();
        want.sort();
        assert_eq!(parse_edge_list(&text, &n.nodes).unwrap(), want);
    }

    #[test]
    fn json_shape() {
        let v = net(&["a", "b"], vec![(1, 0)]).to_json();
        assert_eq!(v["method"], "lasso");
        assert_eq!(v["edges"][0][0], "b");
        assert_eq!(v["params"]["lambda"], "auto_sixteen_over_m");
    }

    #[test]
    fn too_few_columns() {
        let t = DataTable::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 5.0]],
        )
        .unwrap();
        assert!(build_network(&t, &SelectionMethod::lasso()).is_err());
    }
}
