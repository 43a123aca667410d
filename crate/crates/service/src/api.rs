//! HTTP routes.
//!
//! | method | path                          |
//! |--------|-------------------------------|
//! | GET    | `/api/classes`                |
//! | GET    | `/api/classes/{id}/problems`  |
//! | POST   | `/api/recommend`              |
//! | GET    | `/api/solvers/{id}/price`     |

use std::io::Write;
use std::path::Path as FsPath;
use std::sync::{Arc, RwLock};

use advisor_core::catalog::Catalog;
use advisor_core::registry::{fetch_prices, FilePriceProvider, PriceProvider, RegistrySnapshot, PRICES_FILE};
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use chrono::Utc;
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::error::ServiceError;
use crate::request::{encode, recommend_response, RecommendRequest};

/// Shared service state. The snapshot is replaced wholesale on price refresh;
/// requests clone the `Arc` once and never see a partial update.
pub struct AppState {
    pub catalog: Catalog,
    snapshot: RwLock<Arc<RegistrySnapshot>>,
    pub prices: Arc<dyn PriceProvider>,
}

impl AppState {
    pub fn new(catalog: Catalog, snapshot: RegistrySnapshot, prices: Arc<dyn PriceProvider>) -> Self {
        Self { catalog, snapshot: RwLock::new(Arc::new(snapshot)), prices }
    }

    /// State for a registry directory, with prices re-read from its `prices.json`.
    pub fn from_registry(dir: &FsPath, warn: &mut dyn Write) -> Result<Self, String> {
        let (catalog, snapshot) = crate::cli::load_registry(dir, warn)?;
        Ok(Self::new(catalog, snapshot, Arc::new(FilePriceProvider::new(dir.join(PRICES_FILE)))))
    }

    pub fn snapshot(&self) -> Arc<RegistrySnapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    fn store_price(&self, entry: advisor_core::registry::PriceEntry) {
        let mut guard = self.snapshot.write().expect("snapshot lock poisoned");
        let mut prices = guard.prices.clone();
        prices.insert(entry.price_ref.clone(), entry);
        *guard = Arc::new(guard.with_prices(prices));
    }
}

fn json(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn classes(State(state): State<Arc<AppState>>) -> Response {
    json(encode(&state.catalog.list_classes()))
}

async fn problems(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let list = state.catalog.list_problems(&id).map_err(|_| ServiceError::UnknownClass(id))?;
    Ok(json(encode(&list)))
}

async fn recommend(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ServiceError> {
    let request = RecommendRequest::from_slice(&body)?;
    let instance = request.to_instance(&state.catalog)?;
    let response = recommend_response(&state.catalog, &state.snapshot(), &instance)?;
    Ok(json(encode(&response)))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PriceBody<'a> {
    solver_id: &'a str,
    #[serde(flatten)]
    entry: &'a advisor_core::registry::PriceEntry,
}

async fn price(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let snapshot = state.snapshot();
    let solver = snapshot.solver(&id).ok_or_else(|| ServiceError::UnknownSolver(id.clone()))?;
    let price_ref = solver.price_ref.clone().ok_or_else(|| ServiceError::NoPrice(id.clone()))?;

    let refs = [price_ref.clone()];
    let provider = state.prices.clone();
    let prior = snapshot.prices.clone();
    let refreshed = tokio::task::spawn_blocking(move || fetch_prices(provider.as_ref(), &refs, &prior, Utc::now()))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?;

    match refreshed {
        Ok(prices) => {
            let entry = prices.get(&price_ref).cloned().ok_or_else(|| ServiceError::NoPrice(id.clone()))?;
            if snapshot.prices.get(&price_ref) != Some(&entry) {
                state.store_price(entry.clone());
            }
            Ok(json(encode(&PriceBody { solver_id: &id, entry: &entry })))
        }
        Err(stale) => Err(ServiceError::ProviderUnavailable {
            reason: stale.error.to_string(),
            stale: stale.prices.get(&price_ref).cloned(),
        }),
    }
}

/// CORS policy for the browser client; `None` allows any origin.
pub fn cors(origin: Option<&str>) -> CorsLayer {
    let allow = match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::HEAD, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/classes", get(classes))
        .route("/api/classes/{id}/problems", get(problems))
        .route("/api/recommend", post(recommend))
        .route("/api/solvers/{id}/price", get(price))
        .with_state(state)
}
