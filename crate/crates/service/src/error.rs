use advisor_core::registry::PriceEntry;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use serde::Serialize;
use thiserror::Error;

use crate::request::encode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("unknown problem class `{0}`")]
    UnknownClass(String),
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("no price is available for solver `{0}`")]
    NoPrice(String),
    #[error("no variable-count formula registered for problem `{0}`")]
    NoFormula(String),
    #[error("{reason}")]
    ProviderUnavailable { reason: String, stale: Option<PriceEntry> },
    #[error("{0}")]
    Internal(String),
}

/// `application/problem+json` body.
#[derive(Debug, Serialize)]
struct Problem<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    title: &'static str,
    status: u16,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    stale: Option<&'a PriceEntry>,
}

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            Self::BadRequest(_) => StatusCode::BAD_REQUEST,
            Self::UnknownClass(_) | Self::UnknownSolver(_) | Self::NoPrice(_) => StatusCode::NOT_FOUND,
            Self::NoFormula(_) => StatusCode::UNPROCESSABLE_ENTITY,
            Self::ProviderUnavailable { .. } => StatusCode::SERVICE_UNAVAILABLE,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn slug(&self) -> (&'static str, &'static str) {
        match self {
            Self::BadRequest(_) => ("invalid-request", "Invalid request"),
            Self::UnknownClass(_) => ("unknown-class", "Unknown problem class"),
            Self::UnknownSolver(_) => ("unknown-solver", "Unknown solver"),
            Self::NoPrice(_) => ("no-price", "No price available"),
            Self::NoFormula(_) => ("no-formula", "No resource formula for problem"),
            Self::ProviderUnavailable { .. } => ("provider-unavailable", "Price provider unavailable"),
            Self::Internal(_) => ("internal", "Internal error"),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        let (kind, title) = self.slug();
        let stale = match &self {
            Self::ProviderUnavailable { stale, .. } => stale.as_ref(),
            _ => None,
        };
        let body = encode(&Problem { kind, title, status: status.as_u16(), detail: self.to_string(), stale });
        (status, [(header::CONTENT_TYPE, "application/problem+json")], body).into_response()
    }
}
