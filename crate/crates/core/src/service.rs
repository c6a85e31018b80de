//! HTTP API over the analysis modules and the record store.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{analyze, AnalysisError};
use crate::engine::{classify_plan, evaluate, Evaluation, PlanError, ProductionPlan};
use crate::io_core::{technical_coefficients, IoTable};
use crate::linkage::VThresholdRule;
use crate::merger::{hhi, screen, MergerError, MergerScenario};
use crate::store::{Kind, Store, StoreError};
use crate::structure::{Basis, EntropyVariant, GiOrientation, StructureOptions, DEFAULT_ALPHA_RANK_WEIGHT};
use crate::tech::{assess, validate_scaling_property, TccReport, TechError, TechnologyProfile};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl ToString) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.to_string(),
        }
    }

    fn not_found(kind: Kind, id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            code: "not_found",
            message: format!("{kind} {id} not found"),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: message.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound { kind, id } => ApiError::not_found(kind, &id),
            other => ApiError::internal(other),
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        ApiError::bad_request("invalid_table", e)
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        ApiError::bad_request("invalid_plan", e)
    }
}

impl From<MergerError> for ApiError {
    fn from(e: MergerError) -> Self {
        ApiError::bad_request("invalid_shares", e)
    }
}

impl From<TechError> for ApiError {
    fn from(e: TechError) -> Self {
        ApiError::bad_request("invalid_profile", e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("invalid_json", e))
}

pub struct AppState {
    store: Arc<Store>,
    /// Evaluations of one plan run one at a time so each supersedes the last.
    plan_locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(store: Arc<Store>) -> Arc<Self> {
        Arc::new(Self {
            store,
            plan_locks: Mutex::new(HashMap::new()),
        })
    }

    fn plan_lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.plan_locks.lock().expect("plan lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/tables", post(create_table))
        .route("/tables/:id", get(get_table))
        .route("/analysis/io/:id/linkages", get(linkages))
        .route("/analysis/io/:id/structure", get(structure))
        .route("/tools/hhi", post(tool_hhi))
        .route("/tools/tcc", post(tool_tcc))
        .route("/plans", post(create_plan))
        .route("/plans/:id", get(get_plan))
        .route("/plans/:id/evaluate", post(evaluate_plan))
        .route("/evaluations/:id", get(get_evaluation))
        .with_state(AppState::new(store))
}

pub async fn serve(addr: SocketAddr, store_dir: PathBuf) -> std::io::Result<()> {
    let store = tokio::task::spawn_blocking(move || Store::open(store_dir))
        .await
        .expect("store open task")
        .map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, dir = %store.dir().display(), "listening");
    axum::serve(listener, router(Arc::new(store)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Runs a store write off the async workers; appends fsync.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, StoreError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(ApiError::internal)?
        .map_err(ApiError::from)
}

fn raw_json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn csv_response(body: Vec<u8>) -> Response {
    (StatusCode::OK, [(header::CONTENT_TYPE, "text/csv")], body).into_response()
}

fn load_table(state: &AppState, id: &str) -> ApiResult<IoTable> {
    Ok(state.store.get_as(Kind::Table, id)?)
}

async fn create_table(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.contains("csv"));
    let table: IoTable = if is_csv {
        IoTable::from_csv_reader(&body[..]).map_err(|e| ApiError::bad_request("invalid_table", e))?
    } else {
        parse_json(&body)?
    };
    // only productive tables are stored, so every stored table can be analyzed
    technical_coefficients(&table).map_err(|e| ApiError::bad_request("invalid_table", e))?;
    let sectors = table.len();
    let store = state.store.clone();
    let id = blocking(move || store.append(Kind::Table, &table)).await?;
    Ok((StatusCode::CREATED, Json(json!({"id": id, "sectors": sectors}))).into_response())
}

async fn get_table(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let rec = state.store.get(Kind::Table, &id).ok_or_else(|| ApiError::not_found(Kind::Table, &id))?;
    Ok(raw_json(StatusCode::OK, rec.payload.get().to_string()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Deserialize)]
struct LinkageQuery {
    #[serde(default)]
    v_backward: Option<f64>,
    #[serde(default)]
    v_forward: Option<f64>,
    #[serde(default)]
    format: OutputFormat,
}

impl LinkageQuery {
    fn rule(&self) -> ApiResult<VThresholdRule> {
        match (self.v_backward, self.v_forward) {
            (None, None) => Ok(VThresholdRule::Median),
            (Some(backward), Some(forward)) => Ok(VThresholdRule::Fixed { backward, forward }),
            _ => Err(ApiError::bad_request(
                "invalid_query",
                "v_backward and v_forward must be given together",
            )),
        }
    }
}

async fn linkages(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<LinkageQuery>,
) -> ApiResult<Response> {
    let table = load_table(&state, &id)?;
    let report = analyze(&table, q.rule()?, StructureOptions::default())?.linkage;
    Ok(match q.format {
        OutputFormat::Json => Json(report).into_response(),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf).map_err(ApiError::internal)?;
            csv_response(buf)
        }
    })
}

#[derive(Debug, Deserialize)]
struct StructureQuery {
    #[serde(default)]
    variant: Option<String>,
    #[serde(default)]
    basis: Basis,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    gi: GiOrientation,
    #[serde(default)]
    format: OutputFormat,
}

async fn structure(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<StructureQuery>,
) -> ApiResult<Response> {
    let table = load_table(&state, &id)?;
    let entropy_variant = match &q.variant {
        Some(v) => v
            .parse::<EntropyVariant>()
            .map_err(|e| ApiError::bad_request("invalid_query", e))?,
        None => EntropyVariant::default(),
    };
    let opts = StructureOptions {
        basis: q.basis,
        entropy_variant,
        alpha_rank_weight: q.alpha.unwrap_or(DEFAULT_ALPHA_RANK_WEIGHT),
    };
    let report = analyze(&table, VThresholdRule::Median, opts)?.structure;
    Ok(match q.format {
        OutputFormat::Json => Json(report).into_response(),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf, q.gi).map_err(ApiError::internal)?;
            csv_response(buf)
        }
    })
}

#[derive(Debug, Deserialize)]
struct HhiRequest {
    shares: Vec<f64>,
    #[serde(default)]
    merging: Option<[usize; 2]>,
}

async fn tool_hhi(body: Bytes) -> ApiResult<Response> {
    let req: HhiRequest = parse_json(&body)?;
    Ok(match req.merging {
        None => Json(json!({"hhi": hhi(&req.shares)?})).into_response(),
        Some([a, b]) => Json(screen(&MergerScenario::new(req.shares, a, b)?)).into_response(),
    })
}

#[derive(Debug, Deserialize)]
struct TccQuery {
    #[serde(default)]
    k: Option<f64>,
}

async fn tool_tcc(Query(q): Query<TccQuery>, body: Bytes) -> ApiResult<Response> {
    let profile: TechnologyProfile = parse_json(&body)?;
    let assessment = assess(&profile)?;
    let scaling = q.k.map(|k| validate_scaling_property(&profile, k)).transpose()?;
    Ok(Json(TccReport { assessment, scaling }).into_response())
}

#[derive(Serialize)]
struct PlanCreated {
    id: String,
    group: u8,
}

async fn create_plan(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    let plan: ProductionPlan = parse_json(&body)?;
    let group = classify_plan(&plan)?.number();
    let store = state.store.clone();
    let (id, _) = blocking(move || {
        store.append_with(Kind::Plan, None, None, |id| ProductionPlan {
            id: Some(id.to_string()),
            ..plan
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(PlanCreated { id, group })).into_response())
}

async fn get_plan(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let rec = state.store.get(Kind::Plan, &id).ok_or_else(|| ApiError::not_found(Kind::Plan, &id))?;
    Ok(raw_json(StatusCode::OK, rec.payload.get().to_string()))
}

async fn evaluate_plan(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let plan: ProductionPlan = state.store.get_as(Kind::Plan, &id)?;
    let lock = state.plan_lock(&id);
    let _guard = lock.lock().await;
    let evaluation = evaluate(&plan)?;
    let previous = state.store.latest_for(Kind::Evaluation, &id);
    let store = state.store.clone();
    let (_, stored) = blocking(move || {
        store.append_with(Kind::Evaluation, Some(&id), previous.as_deref(), |eid| Evaluation {
            evaluation_id: Some(eid.to_string()),
            plan_id: Some(id.clone()),
            supersedes: previous.clone(),
            ..evaluation
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(stored)).into_response())
}

async fn get_evaluation(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let rec = state
        .store
        .get(Kind::Evaluation, &id)
        .ok_or_else(|| ApiError::not_found(Kind::Evaluation, &id))?;
    let mut resp = raw_json(StatusCode::OK, rec.payload.get().to_string());
    if let Some(by) = state.store.superseded_by(&id) {
        if let Ok(v) = by.parse() {
            resp.headers_mut().insert("x-superseded-by", v);
        }
    }
    Ok(resp)
}
