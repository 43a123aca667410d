//! Solver filtering and ranking.
//!
//! Candidates are those whose capacity covers the instance: QPU solvers by
//! estimated physical qubits on their topology, hybrid solvers by logical
//! variable count. When a benchmark row lies close enough to the instance
//! size, candidates are ranked by its scores; otherwise by raw capacity.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, ProblemInstance};
use crate::estimator::estimate_per_topology;
use crate::registry::RegistrySnapshot;

/// Relative tolerance between a benchmark's main parameter and the requested size.
pub const BENCHMARK_TOLERANCE_PCT: u64 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdvisorError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("QPU solver `{solver}` uses topology `{topology}` which has no qubit estimate")]
    UnknownTopology { solver: String, topology: String },
    #[error("no solver can hold {num_var} variables")]
    NoCandidates { num_var: u64, qubits_by_topology: BTreeMap<String, u64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Qpu,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Solver {
    pub id: String,
    pub name: String,
    pub kind: SolverKind,
    #[serde(default)]
    pub max_qubits: u64,
    #[serde(default)]
    pub max_variables: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_ref: Option<String>,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchmarkRow {
    pub main_param: u64,
    /// Success percentages, positionally aligned with the set's solver names.
    pub scores: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchmarkSet {
    pub problem_id: String,
    pub solver_names: Vec<String>,
    pub rows: Vec<BenchmarkRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SortMode {
    Benchmarked,
    Default,
}

/// A candidate with its benchmark score, if it has one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scored<'a> {
    pub solver: &'a Solver,
    pub quality: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RankedSolver {
    pub rank: usize,
    pub solver: Solver,
    pub solution_quality: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchmarkMatch {
    /// Zero-based position of the row within its set.
    pub index: usize,
    pub row: BenchmarkRow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub problem_id: String,
    pub num_var: u64,
    pub qubits_by_topology: BTreeMap<String, u64>,
    pub sort_mode: SortMode,
    pub benchmark_row_used: Option<BenchmarkMatch>,
    pub ranked: Vec<RankedSolver>,
}

/// Keeps solvers whose capacity covers the estimate, in input order.
pub fn filter_solvers<'a>(
    solvers: impl IntoIterator<Item = &'a Solver>,
    num_var: u64,
    qubits_by_topology: &BTreeMap<String, u64>,
) -> Result<Vec<&'a Solver>, AdvisorError> {
    let mut kept = Vec::new();
    for s in solvers {
        let fits = match s.kind {
            SolverKind::Hybrid => num_var <= s.max_variables,
            SolverKind::Qpu => {
                let topology = s.topology.as_deref().unwrap_or_default();
                let needed = qubits_by_topology
                    .get(topology)
                    .ok_or_else(|| AdvisorError::UnknownTopology { solver: s.id.clone(), topology: topology.into() })?;
                *needed <= s.max_qubits
            }
        };
        if fits {
            kept.push(s);
        }
    }
    Ok(kept)
}

/// Row whose main parameter is nearest to `n`, provided it lies within
/// 10 % of `n` (inclusive). Equal distances keep the earlier row.
pub fn nearest_benchmark(set: &BenchmarkSet, n: u64) -> Option<BenchmarkMatch> {
    let mut best: Option<(usize, u64)> = None;
    for (j, row) in set.rows.iter().enumerate() {
        let dist = row.main_param.abs_diff(n);
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some((j, dist));
        }
    }
    let (index, dist) = best?;
    // |w − n| ≤ n/10 without rounding
    (100 * dist <= BENCHMARK_TOLERANCE_PCT * n).then(|| BenchmarkMatch { index, row: set.rows[index].clone() })
}

/// Attaches the row's score to each candidate named in `solver_names`.
pub fn assign_quality<'a>(row: &BenchmarkRow, solver_names: &[String], candidates: &[&'a Solver]) -> Vec<Scored<'a>> {
    candidates
        .iter()
        .map(|&solver| {
            let quality = solver_names.iter().position(|n| *n == solver.name).and_then(|k| row.scores.get(k).copied());
            Scored { solver, quality }
        })
        .collect()
}

/// Descending by (maxVariables, maxQubits); ties keep input order.
pub fn sort_default(mut candidates: Vec<&Solver>) -> Vec<&Solver> {
    candidates.sort_by_key(|s| Reverse((s.max_variables, s.max_qubits)));
    candidates
}

/// Scored entries descending by (quality, maxVariables, maxQubits), then
/// unscored entries in default order. Ties keep input order.
pub fn sort_benchmarked(drafts: Vec<Scored<'_>>) -> Vec<Scored<'_>> {
    let (mut scored, unscored): (Vec<_>, Vec<_>) = drafts.into_iter().partition(|d| d.quality.is_some());
    scored.sort_by_key(|d| Reverse((d.quality, d.solver.max_variables, d.solver.max_qubits)));
    let unscored = sort_default(unscored.into_iter().map(|d| d.solver).collect());
    scored.extend(unscored.into_iter().map(|solver| Scored { solver, quality: None }));
    scored
}

/// Estimates, filters and ranks the snapshot's solvers for `instance`.
pub fn recommend(
    catalog: &Catalog,
    snapshot: &RegistrySnapshot,
    instance: &ProblemInstance,
) -> Result<Recommendation, AdvisorError> {
    let (num_var, qubits_by_topology) = estimate_per_topology(catalog, instance, snapshot.topologies.values())?;
    let candidates = filter_solvers(&snapshot.solvers, num_var, &qubits_by_topology)?;
    if candidates.is_empty() {
        return Err(AdvisorError::NoCandidates { num_var, qubits_by_topology });
    }

    let benchmark = snapshot
        .benchmarks
        .get(&instance.problem_id)
        .and_then(|set| nearest_benchmark(set, instance.n as u64).map(|m| (set, m)))
        .and_then(|(set, m)| {
            let drafts = assign_quality(&m.row, &set.solver_names, &candidates);
            // A row that scores none of the candidates carries no ranking information.
            drafts.iter().any(|d| d.quality.is_some()).then_some((m, drafts))
        });

    let (sort_mode, benchmark_row_used, ordered) = match benchmark {
        Some((m, drafts)) => (SortMode::Benchmarked, Some(m), sort_benchmarked(drafts)),
        None => {
            let ordered = sort_default(candidates).into_iter().map(|solver| Scored { solver, quality: None }).collect();
            (SortMode::Default, None, ordered)
        }
    };

    let ranked = ordered
        .into_iter()
        .enumerate()
        .map(|(k, d)| RankedSolver { rank: k + 1, solver: d.solver.clone(), solution_quality: d.quality })
        .collect();
    Ok(Recommendation {
        problem_id: instance.problem_id.clone(),
        num_var,
        qubits_by_topology,
        sort_mode,
        benchmark_row_used,
        ranked,
    })
}
