//! Read-only HTTP API.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;

use super::api::{respond, ApiResponse, Endpoint, ResponseFormat, API_PREFIX};
use super::{LoadedIndex, ServiceError};

impl IntoResponse for ApiResponse {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, [(header::CONTENT_TYPE, self.content_type)], self.body).into_response()
    }
}

async fn dispatch(
    State(index): State<Arc<LoadedIndex>>,
    Path(rest): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResponse {
    let Some(format) = ResponseFormat::parse(params.get("format").map(String::as_str)) else {
        return ApiResponse::error(400, "UnsupportedFormat");
    };
    match Endpoint::from_path(&format!("{API_PREFIX}{rest}")) {
        Some(endpoint) => respond(&index, &endpoint, format),
        None => ApiResponse::error(404, "UnknownEndpoint"),
    }
}

async fn not_found() -> ApiResponse {
    ApiResponse::error(404, "UnknownEndpoint")
}

/// Every endpoint lives under one wildcard route so DOIs keep their slashes.
pub fn router(index: Arc<LoadedIndex>) -> Router {
    Router::new().route("/api/v1/{*rest}", get(dispatch)).fallback(not_found).with_state(index)
}

pub async fn bind(port: u16) -> Result<TcpListener, ServiceError> {
    TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port)))
        .await
        .map_err(|source| ServiceError::BindFailure { port, source })
}

pub async fn serve(listener: TcpListener, index: Arc<LoadedIndex>) -> std::io::Result<()> {
    axum::serve(listener, router(index)).await
}

/// Binds `port` and serves until the process exits.
pub fn http_serve(index: LoadedIndex, port: u16) -> Result<(), ServiceError> {
    let runtime =
        tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(ServiceError::io("tokio runtime"))?;
    runtime.block_on(async move {
        let listener = bind(port).await?;
        let addr = listener.local_addr().map_err(ServiceError::io("listener"))?;
        eprintln!("serving {} citations on http://{addr}{API_PREFIX}", index.index.len());
        serve(listener, Arc::new(index)).await.map_err(ServiceError::io("http server"))
    })
}
