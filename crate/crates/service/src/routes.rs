use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use serde::Serialize;
use tower_http::services::{ServeDir, ServeFile};

use riskreg::io::emit_register_csv;
use riskreg::{apply_plan_with, build_heatmap_with, ControlPlan};

use crate::api::*;
use crate::error::ApiError;
use crate::store::RegisterStore;
use crate::ServiceConfig;

#[derive(Clone)]
struct AppState {
    store: Arc<RegisterStore>,
    config: Arc<ServiceConfig>,
}

/// `Json` extractor whose rejections use the service error body.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
struct Json<T>(T);

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        let status = match rejection {
            JsonRejection::JsonDataError(_) => StatusCode::UNPROCESSABLE_ENTITY,
            JsonRejection::MissingJsonContentType(_) => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            _ => StatusCode::BAD_REQUEST,
        };
        let code = if status == StatusCode::UNPROCESSABLE_ENTITY {
            "ValidationError"
        } else {
            "BadRequest"
        };
        ApiError::new(status, code, rejection.body_text())
    }
}

fn query_error(rejection: QueryRejection) -> ApiError {
    ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", rejection.body_text())
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(store: Arc<RegisterStore>, config: ServiceConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let state = AppState {
        store,
        config: Arc::new(config),
    };
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/register", get(get_register))
        .route("/api/entries", post(create_entry))
        .route("/api/entries/{id}", put(put_entry).delete(delete_entry))
        .route("/api/appetite", get(get_appetite).put(put_appetite))
        .route("/api/heatmap", get(get_heatmap))
        .route("/api/controls", get(get_controls))
        .route("/api/whatif", post(whatif))
        .route("/api/save", post(save))
        .route("/api/{*rest}", get(api_not_found))
        .with_state(state);

    match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => api.route("/", get(builtin_index)),
    }
}

async fn api_not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such endpoint")
}

async fn builtin_index() -> Html<&'static str> {
    Html(include_str!("index.html"))
}

async fn health(State(app): State<AppState>) -> Json<HealthDoc> {
    let state = app.store.snapshot();
    Json(HealthDoc {
        status: "ok".into(),
        revision: state.revision,
        entries: state.register.len(),
    })
}

async fn get_register(State(app): State<AppState>) -> Json<RegisterDoc> {
    Json(RegisterDoc::from_state(&app.store.snapshot()))
}

fn upserted(state: &crate::StoreState, id: u32) -> UpsertResponse {
    let entry = state
        .register
        .get(id)
        .map(|e| entry_doc(state, e))
        .expect("entry present after upsert");
    UpsertResponse {
        revision: state.revision,
        entry,
    }
}

async fn put_entry(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<u32>,
    Json(req): Json<UpsertRequest>,
) -> ApiResult<Json<UpsertResponse>> {
    if let Some(body_id) = req.entry.id {
        if body_id != i64::from(id) {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "DomainError",
                format!("body id {body_id} does not match path id {id}"),
            )
            .with_field("entry.id"));
        }
    }
    if id == 0 {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "RangeError",
            "entry id must be positive",
        )
        .with_field("id"));
    }
    let entry = req.entry.into_entry(id)?;
    let state = app.store.upsert(req.expected_revision, entry)?;
    Ok(Json(upserted(&state, id)))
}

async fn create_entry(
    State(app): State<AppState>,
    Json(req): Json<UpsertRequest>,
) -> ApiResult<(StatusCode, Json<UpsertResponse>)> {
    let id = match req.entry.id {
        None => app.store.snapshot().register.next_id(),
        Some(id) if id >= 1 && id <= i64::from(u32::MAX) => id as u32,
        Some(id) => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "RangeError",
                format!("invalid entry id {id}"),
            )
            .with_field("entry.id"))
        }
    };
    let entry = req.entry.into_entry(id)?;
    let state = app.store.insert(req.expected_revision, entry)?;
    Ok((StatusCode::CREATED, Json(upserted(&state, id))))
}

async fn delete_entry(
    State(app): State<AppState>,
    UrlPath(id): UrlPath<u32>,
    query: Result<Query<DeleteQuery>, QueryRejection>,
) -> ApiResult<Json<RevisionDoc>> {
    let Query(query) = query.map_err(query_error)?;
    let state = app.store.delete(query.expected_revision, id)?;
    Ok(Json(RevisionDoc {
        revision: state.revision,
    }))
}

async fn get_appetite(State(app): State<AppState>) -> Json<AppetiteDoc> {
    Json(AppetiteDoc::from_state(&app.store.snapshot()))
}

async fn put_appetite(State(app): State<AppState>, Json(req): Json<AppetiteRequest>) -> ApiResult<Json<AppetiteDoc>> {
    let appetite = req.appetite()?;
    let state = app.store.set_appetite(req.expected_revision, appetite)?;
    Ok(Json(AppetiteDoc::from_state(&state)))
}

async fn get_heatmap(State(app): State<AppState>) -> Json<HeatmapDoc> {
    let state = app.store.snapshot();
    let map = build_heatmap_with(&state.register, state.appetite.value, &state.bands);
    Json(HeatmapDoc {
        revision: state.revision,
        appetite: map.appetite,
        rows: map
            .rows
            .into_iter()
            .enumerate()
            .map(|(i, cells)| HeatRowDoc {
                asset_value: i as u32 + 1,
                cells,
            })
            .collect(),
    })
}

async fn get_controls(State(app): State<AppState>) -> Json<CatalogDoc> {
    Json(app.store.snapshot().catalog.as_ref().clone())
}

async fn whatif(State(app): State<AppState>, Json(req): Json<WhatIfRequest>) -> ApiResult<Json<WhatIfDoc>> {
    let state = app.store.snapshot();
    let plan = ControlPlan {
        assignments: req.assignments,
    };
    let snapshot = apply_plan_with(&state.register, &state.catalog, &plan, &state.bands)?;
    Ok(Json(WhatIfDoc::new(state.revision, &snapshot)))
}

async fn save(State(app): State<AppState>) -> ApiResult<Json<SaveDoc>> {
    let Some(path) = app.config.save_path.clone() else {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "NoSavePath",
            "the service was started without a register file",
        ));
    };
    let state = app.store.snapshot();
    let bytes = emit_register_csv(&state.register);
    let written = path.clone();
    tokio::task::spawn_blocking(move || write_atomic(&written, &bytes))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "IoError", e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "IoError", e.to_string()))?;
    tracing::info!(path = %path.display(), revision = state.revision, "register saved");
    Ok(Json(SaveDoc {
        revision: state.revision,
        path: path.display().to_string(),
        entries: state.register.len(),
    }))
}

/// Writes next to the target and renames over it.
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}
