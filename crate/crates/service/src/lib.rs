//! HTTP API, command line and ranking-evaluation harness for the solver advisor.

pub mod api;
pub mod cli;
pub mod error;
pub mod evaluate;
pub mod request;

pub use api::{router, AppState};
pub use error::ServiceError;
