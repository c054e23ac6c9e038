//! End-to-end run: load, build the network, rank, cluster, evaluate.
//!
//! The single JSON [`Report`] produced here is what the command line writes
//! and what the HTTP service's payloads are carved from.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::centrality::{compute, rank_top_n, CentralityMeasure, CentralityScores, Digraph};
use crate::cluster::{
    elbow_curve, kmeans, select_gmm, BicEntry, CovarianceType, ElbowPoint, GmmResult, KMeansResult,
    DEFAULT_K_MAX, DEFAULT_MAX_ITER, DEFAULT_RESTARTS,
};
use crate::depnet::{build_network_with, DependencyNetwork, EdgeDirection, Execution};
use crate::error::{Error, Result};
use crate::ingest::{
    compute_returns, drop_constant_columns, numeric_table, read_raw_csv, DataTable,
    ReturnDenominator,
};
use crate::linmod::SelectionMethod;
use crate::metrics::{adjusted_rand, davies_bouldin, pca_project, Partition, PcaProjection};

pub const REPORT_SCHEMA: u32 = 1;
/// Largest k on the elbow curve unless the chosen k is larger.
pub const ELBOW_K_MAX: usize = 10;

/// Which clustering to run on the Top-n columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum ClusterSpec {
    #[default]
    None,
    Kmeans {
        k: usize,
    },
    Gmm {
        k_max: usize,
    },
}

impl ClusterSpec {
    pub fn gmm() -> Self {
        ClusterSpec::Gmm {
            k_max: DEFAULT_K_MAX,
        }
    }
}

/// Turns a price table into returns before analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnsOptions {
    pub lags: usize,
    pub denominator: ReturnDenominator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub header: bool,
    pub method: SelectionMethod,
    pub measure: CentralityMeasure,
    pub top_n: usize,
    pub cluster: ClusterSpec,
    pub seed: u64,
    pub edge_direction: EdgeDirection,
    /// Column excluded from the analysis (e.g. a date).
    pub date_col: Option<String>,
    /// Column holding reference labels for the adjusted Rand index; excluded
    /// from the analysis.
    pub labels_col: Option<String>,
    pub returns: Option<ReturnsOptions>,
    pub include_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            header: true,
            method: SelectionMethod::default(),
            measure: "alpha".parse().expect("known measure"),
            top_n: 5,
            cluster: ClusterSpec::None,
            seed: 0,
            edge_direction: EdgeDirection::default(),
            date_col: None,
            labels_col: None,
            returns: None,
            include_timings: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_n < 1 {
            return Err(Error::OutOfRange("top-n must be at least 1".into()));
        }
        match self.cluster {
            ClusterSpec::Kmeans { k } if k < 1 => {
                return Err(Error::OutOfRange("k must be at least 1".into()))
            }
            ClusterSpec::Gmm { k_max } if k_max < 1 => {
                return Err(Error::OutOfRange("k_max must be at least 1".into()))
            }
            _ => {}
        }
        self.method.validate()?;
        self.measure.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub rows: usize,
    pub columns: Vec<String>,
    pub non_numeric_columns: Vec<String>,
    pub constant_columns: Vec<String>,
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

/// Clustering of a column subset with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum ClusteringResult {
    Kmeans {
        variables: Vec<String>,
        result: KMeansResult,
        elbow: Vec<ElbowPoint>,
    },
    Gmm {
        variables: Vec<String>,
        result: GmmResult,
        bic_table: Vec<BicEntry>,
    },
}

impl ClusteringResult {
    pub fn labels(&self) -> &[usize] {
        match self {
            ClusteringResult::Kmeans { result, .. } => &result.labels,
            ClusteringResult::Gmm { result, .. } => &result.labels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dbi: Option<f64>,
    pub ari: Option<f64>,
    pub pca: Option<PcaReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaReport {
    pub coords: Vec<Vec<f64>>,
    pub explained: Vec<f64>,
}

impl From<PcaProjection> for PcaReport {
    fn from(p: PcaProjection) -> Self {
        Self {
            coords: p.coordinates,
            explained: p.explained_variance_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: PipelineConfig,
    pub input: InputSummary,
    pub network: serde_json::Value,
    pub per_node: Vec<crate::depnet::NodeFitSummary>,
    pub centrality: serde_json::Value,
    pub top_n: Vec<String>,
    pub clustering: Option<ClusteringResult>,
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

/// Parsed input ready for network construction.
#[derive(Debug, Clone)]
pub struct PreparedInput {
    pub table: DataTable,
    pub summary: InputSummary,
    pub reference_labels: Option<Partition>,
}

/// Loads CSV bytes, applies the optional return transform and drops constant
/// columns.
pub fn prepare_input(bytes: &[u8], config: &PipelineConfig) -> Result<PreparedInput> {
    let raw = read_raw_csv(bytes, config.header)?;
    let mut exclude: Vec<&str> = Vec::new();
    for name in [&config.date_col, &config.labels_col].into_iter().flatten() {
        if !raw.names.iter().any(|n| n == name) {
            return Err(Error::InvalidInput(format!("no column named `{name}`")));
        }
        exclude.push(name);
    }
    let loaded = numeric_table(&raw, &exclude)?;
    let mut table = loaded.table;
    let mut warnings = loaded.warnings;

    let mut reference_labels = None;
    if let Some(col) = &config.labels_col {
        if loaded.rows_dropped > 0 || config.returns.is_some() {
            warnings.push("reference labels ignored: rows were dropped or shifted".into());
        } else {
            let j = raw
                .names
                .iter()
                .position(|n| n == col)
                .expect("checked above");
            let labels: Vec<&str> = raw.rows.iter().map(|r| r[j].as_str()).collect();
            reference_labels = Some(Partition::from_any(&labels));
        }
    }

    if let Some(opts) = &config.returns {
        table = compute_returns(&table, opts.lags, opts.denominator)?;
    }
    let (table, constant) = drop_constant_columns(&table)?;
    if !constant.is_empty() {
        warnings.push(format!(
            "dropped constant column(s): {}",
            constant.join(", ")
        ));
    }
    let summary = InputSummary {
        rows: table.nrows(),
        columns: table.names().to_vec(),
        non_numeric_columns: loaded.non_numeric_columns,
        constant_columns: constant,
        rows_dropped: loaded.rows_dropped,
        warnings,
    };
    Ok(PreparedInput {
        table,
        summary,
        reference_labels,
    })
}

/// Clusters the named columns of `t`.
pub fn run_clustering(
    t: &DataTable,
    variables: &[String],
    spec: ClusterSpec,
    seed: u64,
) -> Result<Option<ClusteringResult>> {
    let s = t.select(variables)?;
    Ok(match spec {
        ClusterSpec::None => None,
        ClusterSpec::Kmeans { k } => {
            let result = kmeans(&s, k, DEFAULT_RESTARTS, DEFAULT_MAX_ITER, seed)?;
            let top = ELBOW_K_MAX.max(k).min(s.nrows());
            let elbow = elbow_curve(&s, 1, top, DEFAULT_RESTARTS, seed)?;
            Some(ClusteringResult::Kmeans {
                variables: variables.to_vec(),
                result,
                elbow,
            })
        }
        ClusterSpec::Gmm { k_max } => {
            let sel = select_gmm(&s, k_max, &CovarianceType::ALL, seed)?;
            Some(ClusteringResult::Gmm {
                variables: variables.to_vec(),
                result: sel.best,
                bic_table: sel.table,
            })
        }
    })
}

/// DBI of the clustering (when it has two or more clusters), ARI against
/// reference labels (when given) and the PCA projection of the columns.
pub fn evaluate(
    t: &DataTable,
    variables: &[String],
    clustering: Option<&ClusteringResult>,
    reference: Option<&Partition>,
) -> Result<MetricsReport> {
    let s = t.select(variables)?;
    let mut dbi = None;
    let mut ari = None;
    if let Some(c) = clustering {
        let p = Partition::from_any(c.labels());
        if p.k() >= 2 {
            dbi = Some(davies_bouldin(&s, &p)?);
        }
        if let Some(r) = reference {
            ari = Some(adjusted_rand(&p, r)?);
        }
    }
    let pca = if s.ncols() >= 2 {
        Some(pca_project(&s, 2)?.into())
    } else {
        None
    };
    Ok(MetricsReport { dbi, ari, pca })
}

struct Stopwatch {
    enabled: bool,
    times: BTreeMap<String, f64>,
    last: Instant,
}

impl Stopwatch {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            times: BTreeMap::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.times
            .insert(stage.to_owned(), (now - self.last).as_secs_f64() * 1e3);
        self.last = now;
    }

    fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.enabled.then_some(self.times)
    }
}

/// Builds the network for an already prepared table.
pub fn build(t: &DataTable, config: &PipelineConfig) -> Result<DependencyNetwork> {
    build_network_with(
        t,
        &config.method,
        config.edge_direction,
        Execution::Parallel(None),
    )
}

/// Runs every stage and assembles the report.
pub fn run(bytes: &[u8], config: &PipelineConfig) -> Result<Report> {
    config.validate()?;
    let mut clock = Stopwatch::new(config.include_timings);
    let input = prepare_input(bytes, config)?;
    clock.lap("load");
    let table = &input.table;
    if config.top_n > table.ncols() {
        return Err(Error::OutOfRange(format!(
            "top-n {} exceeds the {} analysed columns",
            config.top_n,
            table.ncols()
        )));
    }

    let network = build(table, config)?;
    clock.lap("network");

    let graph = Digraph::from_network(&network)?;
    let scores: CentralityScores = compute(&graph, config.measure)?;
    let top_n = rank_top_n(&scores, table.names(), config.top_n)?;
    clock.lap("centrality");

    let clustering = run_clustering(table, &top_n, config.cluster, config.seed)?;
    clock.lap("clustering");

    let metrics = evaluate(
        table,
        &top_n,
        clustering.as_ref(),
        input.reference_labels.as_ref(),
    )?;
    clock.lap("metrics");

    Ok(Report {
        schema: REPORT_SCHEMA,
        config: config.clone(),
        input: input.summary,
        network: network.to_json(),
        per_node: network.fits.clone(),
        centrality: scores.to_json(table.names()),
        top_n,
        clustering,
        metrics,
        timings_ms: clock.finish(),
    })
}
