//! HTTP inference service. Routes:
//!
//! - `POST /v1/predict`: scene or pre-extracted graph payload to heat maps
//!   and top-k poses
//! - `POST /v1/scene-graph`: scene to the graph payload a privacy-conscious
//!   client would send instead of raw geometry
//! - `GET /v1/model`: taxonomy, thresholds, selection, priors summary
//! - `GET /healthz`: liveness plus model checksum
//!
//! Response bodies are deterministic for identical requests; the request
//! identifier and timing travel in `x-request-id` / `x-elapsed-ms` headers.

use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::augment::{place, HeatMap, RecommendedPose, SamplingSpec};
use crate::dataset::{SceneRecord, SCHEMA_VERSION};
use crate::error::SceneGenError;
use crate::geometry::{OrientedBox, Point2};
use crate::knowledge::{format, KnowledgeModel, PriorsSummary};
use crate::scene::{Category, Scene, SceneObject};
use crate::scene_graph::{self, SceneGraph};

/// A model plus the checksum of its serialized form.
pub struct LoadedModel {
    pub model: KnowledgeModel,
    pub checksum: u32,
}

impl LoadedModel {
    pub fn new(model: KnowledgeModel) -> Result<Self, SceneGenError> {
        let bytes = format::to_bytes(&model);
        Ok(Self { model, checksum: crc32fast::hash(&bytes) })
    }
}

/// Shared service state; the lock enables whole-model atomic swaps while
/// requests keep their own Arc.
pub struct AppState {
    model: RwLock<Arc<LoadedModel>>,
}

impl AppState {
    pub fn new(model: KnowledgeModel) -> Result<Arc<Self>, SceneGenError> {
        Ok(Arc::new(Self { model: RwLock::new(Arc::new(LoadedModel::new(model)?)) }))
    }

    pub fn swap(&self, model: KnowledgeModel) -> Result<(), SceneGenError> {
        let loaded = Arc::new(LoadedModel::new(model)?);
        *self.model.write().unwrap() = loaded;
        Ok(())
    }

    fn current(&self) -> Arc<LoadedModel> {
        self.model.read().unwrap().clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphObject {
    pub category: String,
    pub center: [f64; 3],
    pub half_extents: [f64; 3],
    pub theta_a: f64,
    pub has_known_facing: bool,
}

/// What a client sends instead of a raw scene: anonymized boxes (no ids, no
/// room label) plus the locally extracted features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPayload {
    pub schema_version: u32,
    pub floor: Vec<[f64; 2]>,
    pub objects: Vec<GraphObject>,
    pub graph: SceneGraph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRequest {
    pub schema_version: u32,
    #[serde(default)]
    pub scene: Option<SceneRecord>,
    #[serde(default)]
    pub graph: Option<GraphPayload>,
    #[serde(default)]
    pub category: Option<String>,
    /// Batch mode: score several categories against the same scene.
    #[serde(default)]
    pub categories: Option<Vec<String>>,
    #[serde(default)]
    pub half_extents: Option<[f64; 3]>,
    #[serde(default)]
    pub sampling: Option<SamplingSpec>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryPrediction {
    pub category: String,
    pub heatmap: HeatMap,
    pub poses: Vec<RecommendedPose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub schema_version: u32,
    pub model_dataset_id: String,
    pub model_checksum: u32,
    pub results: Vec<CategoryPrediction>,
}

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "bad_request", message: message.into() }
    }
}

impl From<SceneGenError> for ApiError {
    fn from(e: SceneGenError) -> Self {
        let (status, code) = match &e {
            SceneGenError::UntrainedCategory(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "untrained_category")
            }
            SceneGenError::UnknownCategory(_) => (StatusCode::BAD_REQUEST, "unknown_category"),
            SceneGenError::Contract(_)
            | SceneGenError::InvalidScene(_)
            | SceneGenError::DimensionMismatch { .. }
            | SceneGenError::ThresholdMismatch
            | SceneGenError::FormatVersion { .. }
            | SceneGenError::RuleDeterminedOrientation(_)
            | SceneGenError::NoValidCell { .. } => (StatusCode::BAD_REQUEST, "bad_request"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self { status, code, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

fn scene_from_graph(payload: &GraphPayload) -> Result<Scene, SceneGenError> {
    let shell = crate::geometry::RoomShell::from_polygon(
        payload.floor.iter().map(|v| Point2::new(v[0], v[1])).collect(),
    )?;
    let mut objects = Vec::with_capacity(payload.objects.len());
    for (i, o) in payload.objects.iter().enumerate() {
        objects.push(SceneObject {
            id: format!("g{i}"),
            category: Category::from_name(&o.category)?,
            boxed: OrientedBox::new(
                Point2::new(o.center[0], o.center[1]),
                o.center[2],
                o.half_extents,
                o.theta_a,
            )?,
            has_known_facing: o.has_known_facing,
        });
    }
    Scene::new(shell, objects, "graph")
}

fn predict_impl(
    state: &AppState,
    req: &PredictRequest,
) -> Result<PredictResponse, ApiError> {
    if req.schema_version != SCHEMA_VERSION {
        return Err(ApiError::bad_request(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {}",
            req.schema_version
        )));
    }
    let scene = match (&req.scene, &req.graph) {
        (Some(record), None) => record.to_scene()?,
        (None, Some(graph)) => scene_from_graph(graph)?,
        (Some(_), Some(_)) => {
            return Err(ApiError::bad_request("scene, graph: exactly one must be present"))
        }
        (None, None) => {
            return Err(ApiError::bad_request("scene, graph: exactly one must be present"))
        }
    };
    let names: Vec<String> = match (&req.category, &req.categories) {
        (Some(c), None) => vec![c.clone()],
        (None, Some(cs)) if !cs.is_empty() => cs.clone(),
        _ => {
            return Err(ApiError::bad_request(
                "category, categories: exactly one must be present and non-empty",
            ))
        }
    };

    let loaded = state.current();
    let mut spec = req.sampling.clone().unwrap_or_default();
    if let Some(k) = req.top_k {
        spec.top_k = k;
    }
    let thresholds = loaded.model.thresholds;
    let mut results = Vec::with_capacity(names.len());
    for name in names {
        let category = Category::from_name(&name)?;
        let (rec, heatmap) =
            place(&scene, category, &loaded.model, &spec, &thresholds, req.half_extents)?;
        results.push(CategoryPrediction {
            category: category.name().to_string(),
            heatmap,
            poses: rec.poses,
        });
    }
    Ok(PredictResponse {
        schema_version: SCHEMA_VERSION,
        model_dataset_id: loaded.model.dataset_id.clone(),
        model_checksum: loaded.checksum,
        results,
    })
}

fn with_request_meta(mut resp: Response, started: std::time::Instant) -> Response {
    let id = uuid::Uuid::new_v4().to_string();
    resp.headers_mut().insert("x-request-id", HeaderValue::from_str(&id).unwrap());
    let ms = started.elapsed().as_millis().to_string();
    resp.headers_mut().insert("x-elapsed-ms", HeaderValue::from_str(&ms).unwrap());
    resp
}

fn reject_to_error(rejection: JsonRejection) -> ApiError {
    ApiError::bad_request(rejection.body_text())
}

async fn predict(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<PredictRequest>, JsonRejection>,
) -> Response {
    let started = std::time::Instant::now();
    let resp = match payload {
        Ok(Json(req)) => match predict_impl(&state, &req) {
            Ok(body) => Json(body).into_response(),
            Err(e) => e.into_response(),
        },
        Err(rej) => reject_to_error(rej).into_response(),
    };
    with_request_meta(resp, started)
}

async fn scene_graph_route(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<SceneRecord>, JsonRejection>,
) -> Response {
    let started = std::time::Instant::now();
    let resp = (|| -> Result<Response, ApiError> {
        let Json(record) = payload.map_err(reject_to_error)?;
        let scene = record.to_scene()?;
        let thresholds = state.current().model.thresholds;
        let graph = scene_graph::extract_features(&scene, &thresholds)?;
        let body = GraphPayload {
            schema_version: SCHEMA_VERSION,
            floor: record.floor.clone(),
            objects: scene
                .objects
                .iter()
                .map(|o| GraphObject {
                    category: o.category.name().to_string(),
                    center: [o.boxed.center.x, o.boxed.center.y, o.boxed.center_z],
                    half_extents: o.boxed.half_extents,
                    theta_a: o.boxed.theta_a,
                    has_known_facing: o.has_known_facing,
                })
                .collect(),
            graph,
        };
        Ok(Json(body).into_response())
    })()
    .unwrap_or_else(|e| e.into_response());
    with_request_meta(resp, started)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub schema_version: u32,
    pub dataset_id: String,
    pub checksum: u32,
    pub taxonomy: Vec<&'static str>,
    pub thresholds: crate::geometry::Thresholds,
    pub selection: crate::knowledge::FeatureSelection,
    pub priors: PriorsSummary,
}

async fn model_info(State(state): State<Arc<AppState>>) -> Response {
    let started = std::time::Instant::now();
    let loaded = state.current();
    let body = ModelInfo {
        schema_version: SCHEMA_VERSION,
        dataset_id: loaded.model.dataset_id.clone(),
        checksum: loaded.checksum,
        taxonomy: Category::ALL.iter().map(|c| c.name()).collect(),
        thresholds: loaded.model.thresholds,
        selection: loaded.model.selection.clone(),
        priors: loaded.model.priors_summary(),
    };
    with_request_meta(Json(body).into_response(), started)
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    let started = std::time::Instant::now();
    let loaded = state.current();
    let body = json!({ "status": "ok", "model_checksum": loaded.checksum });
    with_request_meta(Json(body).into_response(), started)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/predict", post(predict))
        .route("/v1/scene-graph", post(scene_graph_route))
        .route("/v1/model", get(model_info))
        .route("/healthz", get(healthz))
        .with_state(state)
}

/// Binds and serves until ctrl-c.
pub async fn serve(addr: &str, model: KnowledgeModel) -> Result<(), SceneGenError> {
    let state = AppState::new(model)?;
    let app = router(state);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
