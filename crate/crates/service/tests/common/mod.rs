#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use advisor_service::{router, AppState};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::response::Response;
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn state(name: &str) -> Arc<AppState> {
    Arc::new(AppState::from_registry(&fixture(name), &mut std::io::sink()).unwrap())
}

pub fn app(name: &str) -> Router {
    router(state(name))
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub response: Response<()>,
    pub body: String,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap()
    }
}

pub async fn send(app: Router, req: Request<Body>) -> Reply {
    let res = app.oneshot(req).await.unwrap();
    let (parts, body) = res.into_parts();
    let bytes = body.collect().await.unwrap().to_bytes();
    Reply {
        status: parts.status,
        content_type: parts.headers.get("content-type").map(|v| v.to_str().unwrap().to_string()).unwrap_or_default(),
        response: Response::from_parts(parts, ()),
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn get(app: Router, uri: &str) -> Reply {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn post(app: Router, uri: &str, body: &str) -> Reply {
    let req = Request::post(uri).header("content-type", "application/json").body(Body::from(body.to_string()));
    send(app, req.unwrap()).await
}

/// Runs the CLI binary with `args`.
pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_annealer-advisor")).args(args).env_remove("QCADVISER_REGISTRY").output().unwrap()
}

pub fn registry_arg(name: &str) -> String {
    fixture(name).to_str().unwrap().to_string()
}
