//! The solver collection: solvers, benchmarks, topologies and prices loaded
//! from JSON documents into an immutable, validated [`RegistrySnapshot`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::advisor::{BenchmarkSet, Solver, SolverKind};
use crate::estimator::Topology;

pub const SOLVERS_FILE: &str = "solvers.json";
pub const BENCHMARKS_FILE: &str = "benchmarks.json";
pub const TOPOLOGIES_FILE: &str = "topologies.json";
pub const PRICES_FILE: &str = "prices.json";
pub const PROBLEMS_FILE: &str = "problems.json";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistryError {
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{document}{path}: {reason}")]
    Schema { document: &'static str, path: String, reason: String },
    #[error("duplicate {kind} `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("benchmark rows for `{problem_id}` are not ascending at row {row_index}")]
    UnsortedBenchmark { problem_id: String, row_index: usize },
    #[error("solver `{solver_id}` references unknown topology `{topology}`")]
    UnknownTopology { solver_id: String, topology: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PriceEntry {
    pub price_ref: String,
    pub amount: f64,
    pub currency: String,
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegistrySnapshot {
    pub solvers: Vec<Solver>,
    pub benchmarks: BTreeMap<String, BenchmarkSet>,
    pub topologies: BTreeMap<String, Topology>,
    pub prices: BTreeMap<String, PriceEntry>,
}

/// Raw JSON text of the four registry documents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistryDocuments {
    pub solvers: String,
    pub benchmarks: String,
    pub topologies: String,
    pub prices: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub snapshot: RegistrySnapshot,
    /// Non-fatal findings, e.g. benchmark columns naming no known solver.
    pub warnings: Vec<String>,
}

fn parse<T: DeserializeOwned>(document: &'static str, text: &str) -> Result<T, RegistryError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| RegistryError::Schema {
        document,
        path: path_suffix(&e.path().to_string()),
        reason: e.inner().to_string(),
    })
}

fn path_suffix(p: &str) -> String {
    match p {
        "." => String::new(),
        p if p.starts_with('[') => p.into(),
        p => format!(".{p}"),
    }
}

fn invalid(document: &'static str, path: String, reason: impl Into<String>) -> RegistryError {
    RegistryError::Schema { document, path, reason: reason.into() }
}

pub fn load_snapshot(docs: &RegistryDocuments) -> Result<Loaded, RegistryError> {
    let solvers: Vec<Solver> = parse(SOLVERS_FILE, &docs.solvers)?;
    let benchmarks: Vec<BenchmarkSet> = parse(BENCHMARKS_FILE, &docs.benchmarks)?;
    let topologies: Vec<Topology> = parse(TOPOLOGIES_FILE, &docs.topologies)?;
    let prices: Vec<PriceEntry> = parse(PRICES_FILE, &docs.prices)?;
    let mut warnings = Vec::new();

    let mut topology_map = BTreeMap::new();
    for (k, t) in topologies.into_iter().enumerate() {
        if t.clique_divisor == 0 {
            return Err(invalid(TOPOLOGIES_FILE, format!("[{k}].cliqueDivisor"), "must be at least 1"));
        }
        if topology_map.contains_key(&t.name) {
            return Err(RegistryError::DuplicateId { kind: "topology", id: t.name });
        }
        topology_map.insert(t.name.clone(), t);
    }

    let mut price_map = BTreeMap::new();
    for (k, p) in prices.into_iter().enumerate() {
        if !(p.amount >= 0.0 && p.amount.is_finite()) {
            return Err(invalid(PRICES_FILE, format!("[{k}].amount"), "must be a non-negative number"));
        }
        if p.currency.len() != 3 || !p.currency.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(invalid(PRICES_FILE, format!("[{k}].currency"), "must be an ISO-4217 code"));
        }
        if price_map.contains_key(&p.price_ref) {
            return Err(RegistryError::DuplicateId { kind: "price", id: p.price_ref });
        }
        price_map.insert(p.price_ref.clone(), p);
    }

    let mut ids = BTreeSet::new();
    for (k, s) in solvers.iter().enumerate() {
        if !ids.insert(s.id.as_str()) {
            return Err(RegistryError::DuplicateId { kind: "solver", id: s.id.clone() });
        }
        match s.kind {
            SolverKind::Qpu => {
                if s.max_qubits == 0 {
                    return Err(invalid(SOLVERS_FILE, format!("[{k}].maxQubits"), "QPU solvers need maxQubits > 0"));
                }
                let Some(topology) = &s.topology else {
                    return Err(invalid(SOLVERS_FILE, format!("[{k}].topology"), "QPU solvers need a topology"));
                };
                if !topology_map.contains_key(topology) {
                    return Err(RegistryError::UnknownTopology { solver_id: s.id.clone(), topology: topology.clone() });
                }
            }
            SolverKind::Hybrid => {
                if s.max_variables == 0 {
                    return Err(invalid(
                        SOLVERS_FILE,
                        format!("[{k}].maxVariables"),
                        "hybrid solvers need maxVariables > 0",
                    ));
                }
            }
        }
        if let Some(r) = &s.price_ref {
            if !price_map.contains_key(r) {
                warnings.push(format!("solver `{}` references unknown price `{r}`", s.id));
            }
        }
    }

    let names: BTreeSet<&str> = solvers.iter().map(|s| s.name.as_str()).collect();
    let mut benchmark_map = BTreeMap::new();
    for (k, set) in benchmarks.into_iter().enumerate() {
        for (r, row) in set.rows.iter().enumerate() {
            let at = |field: &str| format!("[{k}].rows[{r}].{field}");
            if row.main_param == 0 {
                return Err(invalid(BENCHMARKS_FILE, at("mainParam"), "must be positive"));
            }
            if row.scores.len() != set.solver_names.len() {
                return Err(invalid(
                    BENCHMARKS_FILE,
                    at("scores"),
                    format!("expected {} scores, found {}", set.solver_names.len(), row.scores.len()),
                ));
            }
            if let Some(s) = row.scores.iter().position(|&s| s > 100) {
                return Err(invalid(BENCHMARKS_FILE, format!("{}[{s}]", at("scores")), "must be within 0..=100"));
            }
            if r > 0 && row.main_param < set.rows[r - 1].main_param {
                return Err(RegistryError::UnsortedBenchmark { problem_id: set.problem_id.clone(), row_index: r });
            }
        }
        for n in &set.solver_names {
            if !names.contains(n.as_str()) {
                warnings.push(format!("benchmark `{}` names unknown solver `{n}`", set.problem_id));
            }
        }
        if benchmark_map.contains_key(&set.problem_id) {
            return Err(RegistryError::DuplicateId { kind: "benchmark set", id: set.problem_id });
        }
        benchmark_map.insert(set.problem_id.clone(), set);
    }

    Ok(Loaded {
        snapshot: RegistrySnapshot { solvers, benchmarks: benchmark_map, topologies: topology_map, prices: price_map },
        warnings,
    })
}

fn read_optional(path: &Path, fallback: impl FnOnce() -> String) -> Result<String, RegistryError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(fallback()),
        Err(e) => Err(RegistryError::Io { path: path.into(), reason: e.to_string() }),
    }
}

impl RegistryDocuments {
    /// Reads a registry directory. `solvers.json` is required; missing
    /// benchmarks or prices mean none, missing topologies mean the defaults.
    pub fn read_dir(dir: &Path) -> Result<Self, RegistryError> {
        let solvers_path = dir.join(SOLVERS_FILE);
        let solvers = fs::read_to_string(&solvers_path)
            .map_err(|e| RegistryError::Io { path: solvers_path, reason: e.to_string() })?;
        Ok(Self {
            solvers,
            benchmarks: read_optional(&dir.join(BENCHMARKS_FILE), || "[]".into())?,
            topologies: read_optional(&dir.join(TOPOLOGIES_FILE), || {
                serde_json::to_string(&Topology::defaults()).expect("topologies serialize")
            })?,
            prices: read_optional(&dir.join(PRICES_FILE), || "[]".into())?,
        })
    }
}

impl RegistrySnapshot {
    pub fn load_dir(dir: &Path) -> Result<Loaded, RegistryError> {
        load_snapshot(&RegistryDocuments::read_dir(dir)?)
    }

    pub fn solver(&self, id: &str) -> Option<&Solver> {
        self.solvers.iter().find(|s| s.id == id)
    }

    pub fn to_documents(&self) -> RegistryDocuments {
        RegistryDocuments {
            solvers: pretty(&self.solvers),
            benchmarks: pretty(&self.benchmarks.values().collect::<Vec<_>>()),
            topologies: pretty(&self.topologies.values().collect::<Vec<_>>()),
            prices: pretty(&self.prices.values().collect::<Vec<_>>()),
        }
    }

    /// Copy of this snapshot with a new price table.
    pub fn with_prices(&self, prices: BTreeMap<String, PriceEntry>) -> Self {
        Self { prices, ..self.clone() }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("registry values serialize")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("price provider unavailable: {0}")]
pub struct ProviderUnavailable(pub String);

/// Source of current usage prices.
pub trait PriceProvider: Send + Sync {
    /// Current entries for whichever of `refs` the provider knows. Returned
    /// entries need not carry `fetched_at`.
    fn fetch(&self, refs: &[String]) -> Result<Vec<PriceEntry>, ProviderUnavailable>;
}

/// Provider backed by a `prices.json`-shaped file, re-read on every fetch.
/// A missing or malformed file reports the provider as unavailable.
#[derive(Debug, Clone)]
pub struct FilePriceProvider {
    path: PathBuf,
}

impl FilePriceProvider {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }
}

impl PriceProvider for FilePriceProvider {
    fn fetch(&self, refs: &[String]) -> Result<Vec<PriceEntry>, ProviderUnavailable> {
        let text =
            fs::read_to_string(&self.path).map_err(|e| ProviderUnavailable(format!("{}: {e}", self.path.display())))?;
        let entries: Vec<PriceEntry> =
            serde_json::from_str(&text).map_err(|e| ProviderUnavailable(format!("{}: {e}", self.path.display())))?;
        Ok(entries.into_iter().filter(|e| refs.contains(&e.price_ref)).collect())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{error}")]
pub struct StalePrices {
    pub error: ProviderUnavailable,
    /// The unchanged prior table.
    pub prices: BTreeMap<String, PriceEntry>,
}

/// Refreshes `refs` from `client`. Refs the provider does not return keep
/// their prior entries. On provider failure nothing changes and the prior
/// table is handed back as stale.
pub fn fetch_prices(
    client: &dyn PriceProvider,
    refs: &[String],
    prior: &BTreeMap<String, PriceEntry>,
    now: DateTime<Utc>,
) -> Result<BTreeMap<String, PriceEntry>, StalePrices> {
    if refs.is_empty() {
        return Ok(prior.clone());
    }
    let fresh = client.fetch(refs).map_err(|error| StalePrices { error, prices: prior.clone() })?;
    let mut prices = prior.clone();
    for mut e in fresh {
        if !refs.contains(&e.price_ref) {
            continue;
        }
        e.fetched_at = Some(now);
        prices.insert(e.price_ref.clone(), e);
    }
    Ok(prices)
}
