//! Problem classes, problem descriptors and logical-variable-count formulas.
//!
//! The catalog is built once at startup (built-ins plus an optional
//! `problems.json` overlay) and is read-only afterwards.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of the travelling-salesman descriptor shipped with the catalog.
pub const TSP: &str = "tsp";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown problem class `{0}`")]
    UnknownClass(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("no variable-count formula registered for problem `{0}`")]
    NoFormula(String),
    #[error("duplicate parameter `{param}` in problem `{problem}`")]
    DuplicateParam { problem: String, param: String },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("problems document {path}: {reason}")]
    Schema { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemClass {
    pub id: String,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    PositiveInteger,
    DistanceMatrix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub kind: ParamKind,
    pub required: bool,
    /// Inclusive lower bound; only meaningful for integer parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemDescriptor {
    pub id: String,
    pub class_id: String,
    pub name: String,
    pub description: String,
    pub params: Vec<ParamSpec>,
}

impl ProblemDescriptor {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Square matrix of edge lengths. `f64::INFINITY` marks an edge that does not
/// exist; in JSON such entries are written as `null`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    order: usize,
    cells: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, CatalogError> {
        let order = rows.len();
        let mut cells = Vec::with_capacity(order * order);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != order {
                return Err(CatalogError::InvalidInstance(format!(
                    "distance row {i} has {} entries, expected {order}",
                    row.len()
                )));
            }
            cells.extend(row);
        }
        let m = Self { order, cells };
        m.validate()?;
        Ok(m)
    }

    /// Complete graph with every edge of length one.
    pub fn unit(order: usize) -> Self {
        let mut cells = vec![1.0; order * order];
        for i in 0..order {
            cells[i * order + i] = 0.0;
        }
        Self { order, cells }
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let n = self.order;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(CatalogError::InvalidInstance(format!("distance diagonal entry ({i},{i}) must be zero")));
            }
            for j in 0..n {
                let d = self.get(i, j);
                if d.is_nan() || d < 0.0 {
                    return Err(CatalogError::InvalidInstance(format!("distance ({i},{j}) must be non-negative")));
                }
                if d != self.get(j, i) {
                    return Err(CatalogError::InvalidInstance(format!(
                        "distance matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.cells[from * self.order + to]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        from != to && self.get(from, to).is_finite()
    }

    /// Largest finite off-diagonal entry, or zero for an edgeless matrix.
    pub fn max_finite(&self) -> f64 {
        self.cells.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max)
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|d| d.is_finite())
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(self.order.max(1)).map(<[f64]>::to_vec).collect()
    }
}

impl Serialize for DistanceMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Option<f64>>> = self
            .cells
            .chunks(self.order.max(1))
            .map(|r| r.iter().map(|d| d.is_finite().then_some(*d)).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DistanceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Option<f64>>>::deserialize(d)?;
        let rows = rows.into_iter().map(|r| r.into_iter().map(|c| c.unwrap_or(f64::INFINITY)).collect()).collect();
        DistanceMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// A concrete, user-specified problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProblemInstance {
    pub problem_id: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<DistanceMatrix>,
}

impl ProblemInstance {
    pub fn new(problem_id: impl Into<String>, n: usize) -> Result<Self, CatalogError> {
        let inst = Self { problem_id: problem_id.into(), n, distances: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn tsp(n: usize) -> Result<Self, CatalogError> {
        Self::new(TSP, n)
    }

    pub fn with_distances(mut self, distances: DistanceMatrix) -> Result<Self, CatalogError> {
        self.distances = Some(distances);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.n < 2 {
            return Err(CatalogError::InvalidInstance(format!("node count must be at least 2, got {}", self.n)));
        }
        if let Some(d) = &self.distances {
            if d.order() != self.n {
                return Err(CatalogError::InvalidInstance(format!(
                    "distance matrix has order {}, expected {}",
                    d.order(),
                    self.n
                )));
            }
            d.validate()?;
        }
        Ok(())
    }

    /// The explicit matrix, or the complete unit graph when none was given.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        self.distances.clone().unwrap_or_else(|| DistanceMatrix::unit(self.n))
    }
}

/// Number of logical binary variables the QUBO formulation of an instance needs.
pub type VariableFormula = fn(&ProblemInstance) -> u64;

fn tsp_variable_count(instance: &ProblemInstance) -> u64 {
    let n = instance.n as u64;
    n * n
}

#[derive(Clone)]
pub struct Catalog {
    classes: BTreeMap<String, ProblemClass>,
    problems: BTreeMap<String, ProblemDescriptor>,
    formulas: HashMap<String, VariableFormula>,
}

impl fmt::Debug for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut formulas: Vec<_> = self.formulas.keys().collect();
        formulas.sort();
        f.debug_struct("Catalog")
            .field("classes", &self.classes.keys().collect::<Vec<_>>())
            .field("problems", &self.problems.keys().collect::<Vec<_>>())
            .field("formulas", &formulas)
            .finish()
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Self::builtin()
    }
}

fn class(id: &str, name: &str, description: &str) -> ProblemClass {
    ProblemClass { id: id.into(), name: name.into(), description: description.into() }
}

impl Catalog {
    /// Catalog with the three built-in classes and the TSP descriptor.
    pub fn builtin() -> Self {
        let mut catalog = Self { classes: BTreeMap::new(), problems: BTreeMap::new(), formulas: HashMap::new() };
        for c in [
            class("routing", "Routing Problems", "Find cheapest routes or tours through a network of locations."),
            class("sequencing", "Sequencing Problems", "Order jobs or operations on shared resources."),
            class(
                "general",
                "General Problems",
                "Basic problems in their plain form, carrying only their implicit constraints.",
            ),
        ] {
            catalog.classes.insert(c.id.clone(), c);
        }
        catalog.problems.insert(
            TSP.into(),
            ProblemDescriptor {
                id: TSP.into(),
                class_id: "routing".into(),
                name: "Travelling Salesman Problem".into(),
                description: "Find the shortest tour that visits every node exactly once \
                              and returns to the starting node. Without a distance matrix \
                              the graph is complete with unit edge lengths."
                    .into(),
                params: vec![
                    ParamSpec { name: "n".into(), kind: ParamKind::PositiveInteger, required: true, min: Some(2) },
                    ParamSpec { name: "distances".into(), kind: ParamKind::DistanceMatrix, required: false, min: None },
                ],
            },
        );
        catalog.formulas.insert(TSP.into(), tsp_variable_count);
        catalog
    }

    pub fn register_class(&mut self, class: ProblemClass) {
        self.classes.insert(class.id.clone(), class);
    }

    /// Adds or replaces a descriptor. Its class must already be registered.
    pub fn register_problem(&mut self, problem: ProblemDescriptor) -> Result<(), CatalogError> {
        if !self.classes.contains_key(&problem.class_id) {
            return Err(CatalogError::UnknownClass(problem.class_id));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &problem.params {
            if !seen.insert(p.name.as_str()) {
                return Err(CatalogError::DuplicateParam { problem: problem.id.clone(), param: p.name.clone() });
            }
        }
        self.problems.insert(problem.id.clone(), problem);
        Ok(())
    }

    pub fn register_formula(&mut self, problem_id: impl Into<String>, formula: VariableFormula) {
        self.formulas.insert(problem_id.into(), formula);
    }

    /// Merges a `problems.json` document; entries replace built-ins with the same id.
    pub fn merge_problems_json(&mut self, doc: &str) -> Result<(), CatalogError> {
        let de = &mut serde_json::Deserializer::from_str(doc);
        let problems: Vec<ProblemDescriptor> = serde_path_to_error::deserialize(de)
            .map_err(|e| CatalogError::Schema { path: e.path().to_string(), reason: e.inner().to_string() })?;
        for p in problems {
            self.register_problem(p)?;
        }
        Ok(())
    }

    pub fn list_classes(&self) -> Vec<ProblemClass> {
        self.classes.values().cloned().collect()
    }

    pub fn list_problems(&self, class_id: &str) -> Result<Vec<ProblemDescriptor>, CatalogError> {
        if !self.classes.contains_key(class_id) {
            return Err(CatalogError::UnknownClass(class_id.into()));
        }
        Ok(self.problems.values().filter(|p| p.class_id == class_id).cloned().collect())
    }

    pub fn problem(&self, id: &str) -> Result<&ProblemDescriptor, CatalogError> {
        self.problems.get(id).ok_or_else(|| CatalogError::UnknownProblem(id.into()))
    }

    pub fn variable_count(&self, instance: &ProblemInstance) -> Result<u64, CatalogError> {
        let formula = self
            .formulas
            .get(&instance.problem_id)
            .ok_or_else(|| CatalogError::NoFormula(instance.problem_id.clone()))?;
        instance.validate()?;
        Ok(formula(instance))
    }
}
