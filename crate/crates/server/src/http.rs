//! `POST /api/v1/infer` and `GET /api/v1/presets`.

use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;

use crate::api::{ErrorBody, Request, Response, Status};
use crate::service::{malformed, Service};

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/api/v1/infer", post(infer))
        .route("/api/v1/presets", get(presets))
        .with_state(service)
}

async fn infer(State(service): State<Arc<Service>>, body: String) -> (StatusCode, Json<Response>) {
    let req: Request = match serde_json::from_str(&body) {
        Ok(r) => r,
        Err(e) => return (StatusCode::BAD_REQUEST, Json(malformed(&e))),
    };
    match tokio::task::spawn_blocking(move || service.handle(&req)).await {
        Ok(r) => (StatusCode::OK, Json(r)),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(Response {
                status: Status::Error,
                payload: serde_json::Value::Null,
                error: Some(ErrorBody {
                    message: format!("request failed: {e}"),
                    locations: Vec::new(),
                }),
                ms: 0,
            }),
        ),
    }
}

async fn presets(State(service): State<Arc<Service>>) -> Json<serde_json::Value> {
    Json(json!({ "presets": service.presets() }))
}

/// Serves until the process is stopped.
pub async fn serve(service: Arc<Service>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    axum::serve(listener, router(service)).await
}
