//! Request parsing and the recommendation response body shared by the HTTP
//! API and the `recommend --json` command.

use std::collections::BTreeMap;

use advisor_core::advisor::{recommend, AdvisorError, BenchmarkMatch, SolverKind, SortMode};
use advisor_core::catalog::{Catalog, CatalogError, DistanceMatrix, ParamKind, ProblemInstance};
use advisor_core::registry::RegistrySnapshot;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecommendRequest {
    pub problem_id: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl RecommendRequest {
    pub fn from_slice(body: &[u8]) -> Result<Self, ServiceError> {
        serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("invalid request body: {e}")))
    }

    /// Checks the parameters against the problem's schema and builds the instance.
    pub fn to_instance(&self, catalog: &Catalog) -> Result<ProblemInstance, ServiceError> {
        let descriptor = catalog
            .problem(&self.problem_id)
            .map_err(|_| ServiceError::BadRequest(format!("problemId `{}` is not in the catalog", self.problem_id)))?;
        if let Some(unknown) = self.params.keys().find(|k| descriptor.param(k).is_none()) {
            return Err(ServiceError::BadRequest(format!(
                "unknown parameter `{unknown}` for problem `{}`",
                descriptor.id
            )));
        }

        let mut n = None;
        let mut distances = None;
        for spec in &descriptor.params {
            let Some(value) = self.params.get(&spec.name) else {
                if spec.required {
                    return Err(ServiceError::BadRequest(format!("missing parameter `{}`", spec.name)));
                }
                continue;
            };
            match spec.kind {
                ParamKind::PositiveInteger => {
                    let min = spec.min.unwrap_or(1).max(1);
                    let v = value.as_u64().filter(|v| *v >= min).ok_or_else(|| {
                        ServiceError::BadRequest(format!("`{}` must be an integer >= {min}", spec.name))
                    })?;
                    if spec.name == "n" {
                        n = Some(v as usize);
                    }
                }
                ParamKind::DistanceMatrix => {
                    let m: DistanceMatrix = serde_json::from_value(value.clone())
                        .map_err(|e| ServiceError::BadRequest(format!("`{}`: {e}", spec.name)))?;
                    distances = Some(m);
                }
            }
        }
        let n = n.ok_or_else(|| ServiceError::BadRequest("missing parameter `n`".into()))?;
        let instance = ProblemInstance { problem_id: self.problem_id.clone(), n, distances };
        instance.validate().map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        Ok(instance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchmarkInfo {
    pub index: usize,
    pub main_param: u64,
    pub solver_names: Vec<String>,
    pub scores: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RankedSolverBody {
    pub rank: usize,
    pub id: String,
    pub name: String,
    pub kind: SolverKind,
    pub max_qubits: u64,
    pub max_variables: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    /// Physical qubits this instance needs on the solver's topology (QPU only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_qubits: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution_quality: Option<u8>,
    pub has_price: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecommendResponse {
    pub problem_id: String,
    pub num_var: u64,
    pub num_qubits: BTreeMap<String, u64>,
    pub sort_mode: SortMode,
    pub benchmark: Option<BenchmarkInfo>,
    pub no_candidates: bool,
    pub ranked_solvers: Vec<RankedSolverBody>,
}

fn benchmark_info(snapshot: &RegistrySnapshot, problem_id: &str, m: BenchmarkMatch) -> BenchmarkInfo {
    BenchmarkInfo {
        index: m.index,
        main_param: m.row.main_param,
        solver_names: snapshot.benchmarks.get(problem_id).map(|b| b.solver_names.clone()).unwrap_or_default(),
        scores: m.row.scores,
    }
}

pub fn recommend_response(
    catalog: &Catalog,
    snapshot: &RegistrySnapshot,
    instance: &ProblemInstance,
) -> Result<RecommendResponse, ServiceError> {
    match recommend(catalog, snapshot, instance) {
        Ok(r) => {
            let ranked_solvers = r
                .ranked
                .into_iter()
                .map(|rs| {
                    let s = rs.solver;
                    let estimated_qubits = match s.kind {
                        SolverKind::Qpu => s.topology.as_ref().and_then(|t| r.qubits_by_topology.get(t).copied()),
                        SolverKind::Hybrid => None,
                    };
                    RankedSolverBody {
                        rank: rs.rank,
                        has_price: s.price_ref.is_some(),
                        id: s.id,
                        name: s.name,
                        kind: s.kind,
                        max_qubits: s.max_qubits,
                        max_variables: s.max_variables,
                        topology: s.topology,
                        estimated_qubits,
                        solution_quality: rs.solution_quality,
                    }
                })
                .collect();
            Ok(RecommendResponse {
                benchmark: r.benchmark_row_used.map(|m| benchmark_info(snapshot, &r.problem_id, m)),
                problem_id: r.problem_id,
                num_var: r.num_var,
                num_qubits: r.qubits_by_topology,
                sort_mode: r.sort_mode,
                no_candidates: false,
                ranked_solvers,
            })
        }
        Err(AdvisorError::NoCandidates { num_var, qubits_by_topology }) => Ok(RecommendResponse {
            problem_id: instance.problem_id.clone(),
            num_var,
            num_qubits: qubits_by_topology,
            sort_mode: SortMode::Default,
            benchmark: None,
            no_candidates: true,
            ranked_solvers: vec![],
        }),
        Err(AdvisorError::Catalog(CatalogError::NoFormula(id))) => Err(ServiceError::NoFormula(id)),
        Err(e) => Err(ServiceError::Internal(e.to_string())),
    }
}

/// The single JSON encoding used for every response body and `--json` output.
pub fn encode<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("response types serialize");
    s.push('\n');
    s
}
