use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{FromRequest, FromRequestParts, Path, State};
use axum::Json;
use serde::Deserialize;
use serde_json::{json, Value};

use discovars_core::centrality::{
    compute, rank_top_n, CentralityMeasure, CentralityScores, Digraph,
};
use discovars_core::depnet::{build_network_with, EdgeDirection, Execution};
use discovars_core::ingest::ReturnDenominator;
use discovars_core::linmod::SelectionMethod;
use discovars_core::pipeline::{
    evaluate, prepare_input, run_clustering, ClusterSpec, PipelineConfig, ReturnsOptions,
};

use crate::error::ApiError;
use crate::session::{network_key, BuiltNetwork, Session};
use crate::AppState;

type ApiResult<T> = Result<T, ApiError>;

#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
pub struct ApiJson<T>(pub T);

#[derive(FromRequestParts)]
#[from_request(via(axum::extract::Query), rejection(ApiError))]
pub struct ApiQuery<T>(pub T);

fn session(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state
        .sessions
        .get(id)
        .ok_or_else(|| ApiError::not_found(id))
}

pub async fn health() -> &'static str {
    "ok"
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UploadQuery {
    #[serde(default = "yes")]
    header: bool,
    date_col: Option<String>,
    /// Treat the columns as prices and analyse their returns with this many
    /// lags.
    lags: Option<usize>,
    #[serde(default)]
    denominator: ReturnDenominator,
}

fn yes() -> bool {
    true
}

pub async fn upload(
    State(state): State<AppState>,
    ApiQuery(q): ApiQuery<UploadQuery>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    if body.is_empty() {
        return Err(ApiError::invalid("empty upload"));
    }
    let config = PipelineConfig {
        header: q.header,
        date_col: q.date_col,
        returns: q.lags.map(|lags| ReturnsOptions {
            lags,
            denominator: q.denominator,
        }),
        ..Default::default()
    };
    let prepared = tokio::task::spawn_blocking(move || prepare_input(&body, &config)).await??;
    let t = prepared.table;
    let summary = prepared.summary;
    let s = state.sessions.create(t, summary.warnings.clone());
    Ok(Json(json!({
        "session_id": s.id,
        "columns": s.dataset.names(),
        "m": s.dataset.nrows(),
        "d": s.dataset.ncols(),
        "warnings": summary.warnings,
    })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodParams {
    p_enter: Option<f64>,
    p_exit: Option<f64>,
    lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkRequest {
    method: String,
    #[serde(default)]
    params: MethodParams,
    #[serde(default)]
    edge_direction: EdgeDirection,
}

fn network_payload(built: &BuiltNetwork, cached: bool) -> Value {
    let mut v = built.network.to_json();
    let obj = v.as_object_mut().expect("network json is an object");
    obj.insert("per_node_summary".into(), json!(built.network.fits));
    obj.insert("elapsed_ms".into(), json!(built.elapsed_ms));
    obj.insert("cached".into(), json!(cached));
    v
}

pub async fn build_network(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<NetworkRequest>,
) -> ApiResult<Json<Value>> {
    let s = session(&state, &id)?;
    let p = &req.params;
    let method = SelectionMethod::from_parts(&req.method, p.p_enter, p.p_exit, p.lambda)?;
    let key = network_key(&method, req.edge_direction);

    {
        let mut st = s.state();
        if let Some(built) = st.networks.get(&key).cloned() {
            st.current = Some(key);
            return Ok(Json(network_payload(&built, true)));
        }
    }

    let guard = s
        .try_begin_build()
        .ok_or_else(|| ApiError::conflict("a network build is already running for this session"))?;
    let data = s.dataset.clone();
    let direction = req.edge_direction;
    let built = tokio::task::spawn_blocking(move || {
        let start = Instant::now();
        let network = build_network_with(&data, &method, direction, Execution::Parallel(None))?;
        Ok::<_, discovars_core::Error>(BuiltNetwork {
            network,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    })
    .await??;
    let built = Arc::new(built);
    {
        let mut st = s.state();
        st.builds += 1;
        st.networks.insert(key.clone(), built.clone());
        st.current = Some(key);
    }
    drop(guard);
    Ok(Json(network_payload(&built, false)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureQuery {
    measure: String,
    damping: Option<f64>,
    attenuation: Option<f64>,
    beta: Option<f64>,
    n: Option<usize>,
}

impl MeasureQuery {
    fn measure(&self) -> ApiResult<CentralityMeasure> {
        Ok(CentralityMeasure::from_parts(
            &self.measure,
            self.damping,
            self.attenuation,
            self.beta,
        )?)
    }
}

/// Scores on the session's current network, computed at most once per
/// network and measure.
async fn scores_for(
    s: &Arc<Session>,
    measure: CentralityMeasure,
) -> ApiResult<Arc<CentralityScores>> {
    let (key, built) = s
        .state()
        .current_network()
        .ok_or_else(|| ApiError::conflict("no network has been built in this session"))?;
    if let Some(hit) = s.state().cached_scores(&key, &measure) {
        return Ok(hit);
    }
    let scores = tokio::task::spawn_blocking(move || {
        let g = Digraph::from_network(&built.network)?;
        compute(&g, measure)
    })
    .await??;
    Ok(s.state().store_scores(&key, scores))
}

pub async fn centrality(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiQuery(q): ApiQuery<MeasureQuery>,
) -> ApiResult<Json<Value>> {
    let s = session(&state, &id)?;
    if q.n.is_some() {
        return Err(ApiError::invalid("`n` belongs to /topn"));
    }
    let scores = scores_for(&s, q.measure()?).await?;
    Ok(Json(scores.to_json(s.dataset.names())))
}

pub async fn topn(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiQuery(q): ApiQuery<MeasureQuery>,
) -> ApiResult<Json<Value>> {
    let s = session(&state, &id)?;
    let measure = q.measure()?;
    let n = q.n.ok_or_else(|| ApiError::invalid("missing `n`"))?;
    let d = s.dataset.ncols();
    if n < 1 || n > d {
        return Err(ApiError::invalid(format!("n must be between 1 and {d}")));
    }
    let scores = scores_for(&s, measure).await?;
    let names = rank_top_n(&scores, s.dataset.names(), n)?;
    Ok(Json(json!({
        "measure": measure.name(),
        "params": measure.params_json(),
        "n": n,
        "names": names,
    })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterRequest {
    variables: Vec<String>,
    algo: String,
    k: Option<usize>,
    k_max: Option<usize>,
    #[serde(default)]
    seed: u64,
}

impl ClusterRequest {
    fn spec(&self) -> ApiResult<ClusterSpec> {
        let spec = match self.algo.to_ascii_lowercase().as_str() {
            "kmeans" => {
                if self.k_max.is_some() {
                    return Err(ApiError::invalid("kmeans takes `k`, not `k_max`"));
                }
                let k = self
                    .k
                    .ok_or_else(|| ApiError::invalid("kmeans needs `k`"))?;
                ClusterSpec::Kmeans { k }
            }
            "gmm" => {
                if self.k.is_some() {
                    return Err(ApiError::invalid("gmm picks k by BIC; send `k_max`"));
                }
                match self.k_max {
                    Some(k_max) => ClusterSpec::Gmm { k_max },
                    None => ClusterSpec::gmm(),
                }
            }
            other => return Err(ApiError::invalid(format!("unknown algo `{other}`"))),
        };
        match spec {
            ClusterSpec::Kmeans { k: 0 } | ClusterSpec::Gmm { k_max: 0 } => {
                Err(ApiError::invalid("cluster count must be at least 1"))
            }
            _ => Ok(spec),
        }
    }
}

pub async fn cluster(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<ClusterRequest>,
) -> ApiResult<Json<Value>> {
    let s = session(&state, &id)?;
    let spec = req.spec()?;
    if req.variables.is_empty() {
        return Err(ApiError::invalid("`variables` is empty"));
    }
    for v in &req.variables {
        if s.dataset.index_of(v).is_none() {
            return Err(ApiError::invalid(format!("no column named `{v}`")));
        }
    }
    let data = s.dataset.clone();
    let (clustering, metrics) = tokio::task::spawn_blocking(move || {
        let c = run_clustering(&data, &req.variables, spec, req.seed)?
            .expect("kmeans and gmm always cluster");
        let metrics = evaluate(&data, &req.variables, Some(&c), None)?;
        Ok::<_, discovars_core::Error>((c, metrics))
    })
    .await??;
    let mut v = serde_json::to_value(&clustering).map_err(|e| ApiError::internal(e.to_string()))?;
    let obj = v.as_object_mut().expect("clustering json is an object");
    obj.insert("dbi".into(), json!(metrics.dbi));
    obj.insert("pca".into(), json!(metrics.pca));
    Ok(Json(v))
}

pub async fn stats(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Value>> {
    let s = session(&state, &id)?;
    let st = s.state();
    Ok(Json(json!({
        "session_id": s.id,
        "created_at": s.created_at,
        "m": s.dataset.nrows(),
        "d": s.dataset.ncols(),
        "builds": st.builds,
        "building": s.is_building(),
        "cached_networks": st.networks.len(),
        "current_network": st.current_network().map(|(_, b)| b.network.to_json()),
        "centrality_computations": st.score_computations,
        "cached_scores": st.cached_score_count(),
    })))
}
