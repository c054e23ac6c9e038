//! The `discovars` command line: batch pipeline runs, return-table
//! preparation and the HTTP service.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use discovars_core::centrality::CentralityMeasure;
use discovars_core::cluster::DEFAULT_K_MAX;
use discovars_core::depnet::EdgeDirection;
use discovars_core::ingest::{compute_returns, numeric_table, read_raw_csv, ReturnDenominator};
use discovars_core::linmod::SelectionMethod;
use discovars_core::pipeline::{self, ClusterSpec, PipelineConfig, ReturnsOptions};
use discovars_service::{ServiceConfig, DEFAULT_IDLE_TIMEOUT, DEFAULT_MAX_UPLOAD_BYTES};

/// Exit status for bad flags or parameter combinations.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures while running.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "discovars",
    version,
    about = "Find important variables through dependency networks and graph centrality"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the whole pipeline on a CSV and write one JSON report.
    Build(BuildArgs),
    /// Turn a price CSV into return columns with lagged copies.
    Returns(ReturnsArgs),
    /// Start the HTTP/JSON service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Stepwise,
    Forward,
    Stepaic,
    Lasso,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureArg {
    Degree,
    Pagerank,
    Hub,
    Authority,
    Eigen,
    Betweenness,
    Closeness,
    Alpha,
    Power,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClusterArg {
    None,
    Kmeans,
    Gmm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DirectionArg {
    ChildToParent,
    ParentToChild,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DenominatorArg {
    /// (p_t - p_{t-1}) / p_t
    Current,
    /// (p_t - p_{t-1}) / p_{t-1}
    Previous,
}

impl From<DenominatorArg> for ReturnDenominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::Current => ReturnDenominator::Current,
            DenominatorArg::Previous => ReturnDenominator::Previous,
        }
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_owned()
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Input CSV of numeric columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the JSON report; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Variable selection used for each regression.
    #[arg(long, value_enum, default_value = "stepwise")]
    pub method: MethodArg,
    /// Centrality measure used to rank the variables.
    #[arg(long, value_enum, default_value = "alpha")]
    pub measure: MeasureArg,
    /// How many top-ranked variables to keep.
    #[arg(long = "top", default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub top: u64,
    /// Clustering run on the top variables.
    #[arg(long, value_enum, default_value = "none")]
    pub cluster: ClusterArg,
    /// Number of k-means clusters (required with `--cluster kmeans`).
    #[arg(long, required_if_eq("cluster", "kmeans"), value_parser = clap::value_parser!(u64).range(1..))]
    pub k: Option<u64>,
    /// Largest mixture size tried by BIC with `--cluster gmm`.
    #[arg(long, default_value_t = DEFAULT_K_MAX as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub k_max: u64,
    /// Seed for every randomized step.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Orientation of the network's edges.
    #[arg(long, value_enum, default_value = "child-to-parent")]
    pub edge_direction: DirectionArg,
    /// Entry p-value threshold (stepwise, forward) [default: 0.1].
    #[arg(long)]
    pub p_enter: Option<f64>,
    /// Exit p-value threshold (stepwise) [default: 0.25].
    #[arg(long)]
    pub p_exit: Option<f64>,
    /// Lasso penalty [default: 16 / rows].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// PageRank damping factor [default: 0.85].
    #[arg(long)]
    pub damping: Option<f64>,
    /// Katz (alpha) attenuation factor [default: 0.85].
    #[arg(long)]
    pub attenuation: Option<f64>,
    /// Bonacich power beta [default: 0.85].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Column left out of the analysis, such as a date.
    #[arg(long)]
    pub date_col: Option<String>,
    /// Column of reference labels, scored against the clustering with the
    /// adjusted Rand index and left out of the analysis.
    #[arg(long)]
    pub labels_col: Option<String>,
    /// Treat the columns as prices and analyse their returns with this many
    /// lagged copies.
    #[arg(long)]
    pub lags: Option<usize>,
    /// Denominator of the returns computed with `--lags`.
    #[arg(long, value_enum, default_value = "current")]
    pub returns_denominator: DenominatorArg,
    /// The first row is data, not column names.
    #[arg(long)]
    pub no_header: bool,
    /// Leave per-stage timings out of the report so reruns are byte-identical.
    #[arg(long)]
    pub no_timings: bool,
}

impl BuildArgs {
    pub fn to_config(&self) -> Result<PipelineConfig, String> {
        let method = SelectionMethod::from_parts(
            &value_name(self.method),
            self.p_enter,
            self.p_exit,
            self.lambda,
        )
        .map_err(|e| e.to_string())?;
        let measure = CentralityMeasure::from_parts(
            &value_name(self.measure),
            self.damping,
            self.attenuation,
            self.beta,
        )
        .map_err(|e| e.to_string())?;
        let cluster = match self.cluster {
            ClusterArg::None => ClusterSpec::None,
            ClusterArg::Kmeans => ClusterSpec::Kmeans {
                k: self.k.ok_or("--cluster kmeans needs --k")? as usize,
            },
            ClusterArg::Gmm => ClusterSpec::Gmm {
                k_max: self.k_max as usize,
            },
        };
        let config = PipelineConfig {
            header: !self.no_header,
            method,
            measure,
            top_n: self.top as usize,
            cluster,
            seed: self.seed,
            edge_direction: match self.edge_direction {
                DirectionArg::ChildToParent => EdgeDirection::ChildToParent,
                DirectionArg::ParentToChild => EdgeDirection::ParentToChild,
            },
            date_col: self.date_col.clone(),
            labels_col: self.labels_col.clone(),
            returns: self.lags.map(|lags| ReturnsOptions {
                lags,
                denominator: self.returns_denominator.into(),
            }),
            include_timings: !self.no_timings,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ReturnsArgs {
    /// Price CSV, one column per symbol, rows in time order.
    #[arg(long)]
    pub input: PathBuf,
    /// Date column to skip.
    #[arg(long)]
    pub date_col: Option<String>,
    /// Lagged copies of each return column.
    #[arg(long, default_value_t = 0)]
    pub lags: usize,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Which price divides the day-over-day change.
    #[arg(long, value_enum, default_value = "current")]
    pub returns_denominator: DenominatorArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// TCP port; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of sample datasets served under /samples.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Directory of the web client served under /ui.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
    /// Seconds of inactivity before a session is dropped.
    #[arg(long, default_value_t = DEFAULT_IDLE_TIMEOUT.as_secs())]
    pub idle_timeout: u64,
    /// Largest accepted upload in bytes.
    #[arg(long, default_value_t = DEFAULT_MAX_UPLOAD_BYTES)]
    pub max_upload: usize,
    /// Browser origin allowed by CORS; any origin when omitted.
    #[arg(long)]
    pub cors_origin: Option<String>,
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Build(a) => cmd_build(&a),
        Command::Returns(a) => cmd_returns(&a),
        Command::Serve(a) => cmd_serve(&a),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

pub fn cmd_build(args: &BuildArgs) -> i32 {
    let config = match args.to_config() {
        Ok(c) => c,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let bytes = match std::fs::read(&args.input) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_FAILURE, format!("{}: {e}", args.input.display())),
    };
    let report = match pipeline::run(&bytes, &config) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_FAILURE, e),
    };
    for w in &report.input.warnings {
        eprintln!("warning: {w}");
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    let written = match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => fail(EXIT_FAILURE, e),
    }
}

pub fn cmd_returns(args: &ReturnsArgs) -> i32 {
    let result = (|| -> Result<String, String> {
        let bytes =
            std::fs::read(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
        let raw = read_raw_csv(&bytes, true).map_err(|e| e.to_string())?;
        let exclude: Vec<&str> = args.date_col.as_deref().into_iter().collect();
        if let Some(d) = &args.date_col {
            if !raw.names.iter().any(|n| n == d) {
                return Err(format!("no column named `{d}`"));
            }
        }
        let loaded = numeric_table(&raw, &exclude).map_err(|e| e.to_string())?;
        for w in &loaded.warnings {
            eprintln!("warning: {w}");
        }
        let returns = compute_returns(&loaded.table, args.lags, args.returns_denominator.into())
            .map_err(|e| e.to_string())?;
        returns.to_csv().map_err(|e| e.to_string())
    })();
    match result.and_then(|csv| {
        std::fs::write(&args.out, csv).map_err(|e| format!("{}: {e}", args.out.display()))
    }) {
        Ok(()) => 0,
        Err(e) => fail(EXIT_FAILURE, e),
    }
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = interrupt => {},
        _ = terminate => {},
    }
}

pub fn cmd_serve(args: &ServeArgs) -> i32 {
    let config = ServiceConfig {
        idle_timeout: Duration::from_secs(args.idle_timeout),
        max_upload_bytes: args.max_upload,
        ui_dir: args.ui_dir.clone(),
        data_dir: args.data_dir.clone(),
        cors_origin: args.cors_origin.clone(),
    };
    let runtime = match tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
    {
        Ok(r) => r,
        Err(e) => return fail(EXIT_FAILURE, e),
    };
    let addr = format!("{}:{}", args.host, args.port);
    runtime.block_on(async {
        let listener = match tokio::net::TcpListener::bind(&addr).await {
            Ok(l) => l,
            Err(e) => return fail(EXIT_FAILURE, format!("cannot bind {addr}: {e}")),
        };
        match listener.local_addr() {
            Ok(a) => println!("listening on http://{a}"),
            Err(e) => return fail(EXIT_FAILURE, e),
        }
        match discovars_service::serve(listener, config, shutdown_signal()).await {
            Ok(()) => 0,
            Err(e) => fail(EXIT_FAILURE, e),
        }
    })
}
