//! Physical-qubit estimates from logical variable counts.
//!
//! The model assumes a clique embedding: on a topology with clique divisor
//! `D`, every logical variable becomes a chain of `⌊(numVar − 1)/D⌋ + 1`
//! physical qubits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, CatalogError, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Topology {
    pub name: String,
    pub clique_divisor: u64,
    #[serde(default)]
    pub description: String,
}

impl Topology {
    pub fn new(name: &str, clique_divisor: u64, description: &str) -> Self {
        Self { name: name.into(), clique_divisor, description: description.into() }
    }

    /// Chimera, Pegasus and Zephyr with their default divisors.
    pub fn defaults() -> Vec<Topology> {
        vec![
            Self::new("chimera", 4, "K4,4 unit cells, degree 6"),
            Self::new("pegasus", 12, "degree 15"),
            Self::new("zephyr", 16, "degree 20"),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResourceEstimate {
    pub num_var: u64,
    pub num_qubits: u64,
}

pub fn chain_length(num_var: u64, topology: &Topology) -> u64 {
    assert!(num_var >= 1, "at least one variable");
    assert!(topology.clique_divisor >= 1, "clique divisor must be positive");
    (num_var - 1) / topology.clique_divisor + 1
}

pub fn estimate_qubits(num_var: u64, topology: &Topology) -> u64 {
    num_var * chain_length(num_var, topology)
}

pub fn estimate(
    catalog: &Catalog,
    instance: &ProblemInstance,
    topology: &Topology,
) -> Result<ResourceEstimate, CatalogError> {
    let num_var = catalog.variable_count(instance)?;
    Ok(ResourceEstimate { num_var, num_qubits: estimate_qubits(num_var, topology) })
}

/// Logical variable count plus one qubit estimate per topology name.
pub fn estimate_per_topology<'a>(
    catalog: &Catalog,
    instance: &ProblemInstance,
    topologies: impl IntoIterator<Item = &'a Topology>,
) -> Result<(u64, BTreeMap<String, u64>), CatalogError> {
    let num_var = catalog.variable_count(instance)?;
    let by_topology = topologies.into_iter().map(|t| (t.name.clone(), estimate_qubits(num_var, t))).collect();
    Ok((num_var, by_topology))
}
