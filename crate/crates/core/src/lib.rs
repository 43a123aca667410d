//! Solver recommendation for quantum-annealer hardware.
//!
//! A [`catalog::ProblemInstance`] is turned into a logical variable count,
//! per-topology physical qubit estimates ([`estimator`]), and a ranked list
//! of solvers from a [`registry::RegistrySnapshot`] ([`advisor::recommend`]).
//! The [`qubo`] module holds the TSP formulation and the classical oracles
//! used to check that ranking.

pub mod advisor;
pub mod catalog;
pub mod estimator;
pub mod qubo;
pub mod registry;

pub use advisor::{recommend, AdvisorError, Recommendation, SortMode};
pub use catalog::{Catalog, CatalogError, ProblemInstance};
pub use registry::{RegistryError, RegistrySnapshot};
