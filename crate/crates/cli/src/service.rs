//! HTTP JSON API over a review session, under `/api/v1`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use base64::Engine as _;
use ocsr::chemgraph::{canonical_smiles, write_molfile_titled, write_sdf, SdfRecord};
use ocsr::construct::build_graph;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::session::{DetectionPatch, ItemStatus, RunState, SessionItem, Store, StoreError};

pub type Shared = Arc<Store>;

pub struct ApiError(StatusCode, String);

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::BadRequest(_) => StatusCode::BAD_REQUEST,
            StoreError::Conflict(_) => StatusCode::CONFLICT,
            StoreError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// The API routes, plus the static review UI at `/` when given.
pub fn router(store: Shared, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/items", get(list_items))
        .route("/items/:id", get(get_item))
        .route("/items/:id/detections/:k", patch(patch_detection))
        .route("/items/:id/rerun", post(rerun))
        .route("/items/:id/status", post(set_status))
        .route("/export", get(export))
        .with_state(store);
    let app = Router::new().nest("/api/v1", api);
    match static_dir {
        Some(dir) => app.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => app,
    }
}

fn summary(item: &SessionItem) -> Value {
    let mol = item.current().map(|r| &r.molecule);
    json!({
        "id": item.id,
        "status": item.status,
        "version": item.version,
        "run": item.run,
        "stale": item.is_stale(),
        "atoms": mol.map(|m| m.graph.atom_count()),
        "bonds": mol.map(|m| m.graph.bond_count()),
        "diagnostics": mol.map(|m| m.diagnostics.len()),
        "smiles": mol.map(|m| canonical_smiles(&m.graph)),
    })
}

async fn list_items(State(store): State<Shared>) -> Json<Value> {
    let items: Vec<Value> = store.all().iter().map(|i| summary(i)).collect();
    Json(json!({ "session": store.id(), "items": items }))
}

fn media_type(p: &Path) -> &'static str {
    match p.extension().and_then(|e| e.to_str()) {
        Some("png") => "image/png",
        Some("pgm") => "image/x-portable-graymap",
        _ => "application/octet-stream",
    }
}

fn detail(item: &SessionItem) -> Value {
    let image = item.image.as_ref().and_then(|p| {
        std::fs::read(p).ok().map(|bytes| {
            json!({
                "name": p.file_name().map(|n| n.to_string_lossy().into_owned()),
                "media_type": media_type(p),
                "data": base64::engine::general_purpose::STANDARD.encode(bytes),
            })
        })
    });
    let molecule = item.current().map(|r| {
        let m = &r.molecule;
        json!({
            "molfile": write_molfile_titled(&m.graph, &item.id),
            "smiles": canonical_smiles(&m.graph),
            "provenance": m.provenance,
            "diagnostics": m.diagnostics,
            "construction_time_ms": m.construction_time_ms,
            "detection_rev": r.detection_rev,
        })
    });
    let mut v = summary(item);
    let obj = v.as_object_mut().expect("summary is an object");
    obj.insert("image".into(), image.unwrap_or(Value::Null));
    obj.insert(
        "detections".into(),
        serde_json::to_value(&item.detections).expect("detections serialize"),
    );
    obj.insert("detection_rev".into(), json!(item.detection_rev));
    obj.insert("molecule".into(), molecule.unwrap_or(Value::Null));
    obj.insert("history".into(), json!(item.recognitions.len()));
    v
}

async fn get_item(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<Json<Value>> {
    Ok(Json(detail(&*store.get(&id)?)))
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, format!("bad request body: {e}")))
}

async fn patch_detection(
    State(store): State<Shared>,
    UrlPath((id, k)): UrlPath<(String, usize)>,
    body: axum::body::Bytes,
) -> ApiResult<Json<Value>> {
    let patch: DetectionPatch = json_body(&body)?;
    let item = store.patch_detection(&id, k, &patch)?;
    Ok(Json(json!({
        "id": item.id,
        "version": item.version,
        "detection_rev": item.detection_rev,
        "detection": item.detections.detections[k],
        "stale": item.is_stale(),
    })))
}

#[derive(Deserialize)]
struct RerunQuery {
    #[serde(default)]
    wait: bool,
}

/// Starts a recognition off the request path. Answers 202 with the running
/// state, or with the finished item when `?wait=true`.
async fn rerun(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<RerunQuery>,
) -> ApiResult<Response> {
    let (started, set, rev) = store.begin_rerun(&id)?;
    let worker = store.clone();
    let task_id = id.clone();
    let handle = tokio::task::spawn_blocking(move || {
        let result = build_graph(&set, worker.construct_config()).map_err(|e| e.to_string());
        worker.finish_rerun(&task_id, rev, result)
    });
    if !q.wait {
        tokio::spawn(async move {
            if let Ok(Err(e)) = handle.await {
                log::error!("rerun of {id}: {e}");
            }
        });
        return Ok((StatusCode::ACCEPTED, Json(summary(&started))).into_response());
    }
    let done = handle.await.map_err(|e| {
        ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("rerun task: {e}"),
        )
    })??;
    Ok(Json(detail(&done)).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StatusBody {
    status: String,
    version: Option<u64>,
}

async fn set_status(
    State(store): State<Shared>,
    UrlPath(id): UrlPath<String>,
    body: axum::body::Bytes,
) -> ApiResult<Json<Value>> {
    let b: StatusBody = json_body(&body)?;
    let to = ItemStatus::parse(&b.status).ok_or_else(|| {
        ApiError(
            StatusCode::BAD_REQUEST,
            format!(
                "unknown status {:?}; expected pending, accepted or flagged",
                b.status
            ),
        )
    })?;
    Ok(Json(summary(&*store.set_status(&id, to, b.version)?)))
}

#[derive(Deserialize)]
struct ExportQuery {
    /// Comma-separated statuses, or `all`.
    status: Option<String>,
    format: Option<String>,
}

/// SDF (default) or CSV of SMILES for items in the requested statuses.
/// Items without a recognition or still running are skipped.
async fn export(State(store): State<Shared>, Query(q): Query<ExportQuery>) -> ApiResult<Response> {
    let wanted = q.status.as_deref().unwrap_or("accepted");
    let statuses: Vec<ItemStatus> = if wanted == "all" {
        vec![
            ItemStatus::Pending,
            ItemStatus::Accepted,
            ItemStatus::Flagged,
        ]
    } else {
        wanted
            .split(',')
            .map(|s| {
                ItemStatus::parse(s.trim()).ok_or_else(|| {
                    ApiError(StatusCode::BAD_REQUEST, format!("unknown status {s:?}"))
                })
            })
            .collect::<ApiResult<_>>()?
    };
    let items: Vec<Arc<SessionItem>> = store
        .all()
        .into_iter()
        .filter(|i| {
            statuses.contains(&i.status) && i.run != RunState::Running && i.current().is_some()
        })
        .collect();
    let bad = || ApiError(StatusCode::BAD_REQUEST, "format must be sdf or csv".into());
    match q.format.as_deref().unwrap_or("sdf") {
        "sdf" => {
            let records: Vec<SdfRecord> = items
                .iter()
                .map(|i| SdfRecord {
                    title: i.id.clone(),
                    graph: i.current().expect("filtered").molecule.graph.clone(),
                    properties: vec![("status".into(), i.status.as_str().into())],
                })
                .collect();
            Ok(attachment(
                "chemical/x-mdl-sdfile",
                "export.sdf",
                write_sdf(&records),
            ))
        }
        "csv" => {
            let mut out = String::from("id,smiles,status\n");
            for i in &items {
                let smiles = canonical_smiles(&i.current().expect("filtered").molecule.graph);
                out.push_str(&format!(
                    "{},{},{}\n",
                    csv_field(&i.id),
                    csv_field(&smiles),
                    i.status.as_str()
                ));
            }
            Ok(attachment("text/csv", "export.csv", out))
        }
        _ => Err(bad()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn attachment(media: &'static str, name: &str, body: String) -> Response {
    (
        [
            (header::CONTENT_TYPE, media.to_string()),
            (
                header::CONTENT_DISPOSITION,
                format!("attachment; filename=\"{name}\""),
            ),
        ],
        body,
    )
        .into_response()
}

/// Binds and serves until Ctrl-C.
pub async fn serve(
    store: Shared,
    bind: std::net::SocketAddr,
    static_dir: Option<PathBuf>,
) -> anyhow::Result<()> {
    use anyhow::Context;
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .with_context(|| format!("binding {bind}"))?;
    log::info!(
        "serving session {} on http://{}",
        store.id(),
        listener.local_addr()?
    );
    axum::serve(listener, router(store, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
