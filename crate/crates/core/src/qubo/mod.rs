//! QUBO models, the TSP formulation, and the classical oracles used to check
//! recommendations: exhaustive tour search and a simulated-annealing sampler.

use std::collections::BTreeMap;

use thiserror::Error;

mod anneal;
mod tsp;

pub use anneal::{sample, AnnealParams, SampleResult};
pub use tsp::{
    brute_force_tsp, build_tsp_qubo, decode_order, decode_tour, deviation_pct, encode_tour, var_index, PenaltyWeights,
    Tour, MAX_BRUTE_FORCE_NODES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("assignment has {got} bits, QUBO has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("penalty weights must be positive and finite (c1={c1}, c2={c2})")]
    InvalidWeights { c1: f64, c2: f64 },
    #[error("{0} nodes exceeds the exhaustive search bound of {MAX_BRUTE_FORCE_NODES}")]
    TooLarge(usize),
    #[error("graph has no Hamiltonian cycle")]
    NoFeasibleTour,
    #[error("optimum tour has zero cost; relative deviation is undefined")]
    ZeroOptimum,
}

/// Upper-triangular quadratic form over binary variables. Diagonal entries are
/// the linear terms (x² = x for binary x).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Qubo {
    size: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
}

impl Qubo {
    pub fn new(size: usize) -> Self {
        Self { size, coeffs: BTreeMap::new() }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Accumulates `value` onto the (i, j) term; the pair is stored as (min, max).
    ///
    /// Panics if either index is out of range.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.size && j < self.size, "index ({i},{j}) out of range {}", self.size);
        if value == 0.0 {
            return;
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.coeffs.entry(key).or_insert(0.0) += value;
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn evaluate(&self, bits: &[u8]) -> Result<f64, QuboError> {
        if bits.len() != self.size {
            return Err(QuboError::LengthMismatch { expected: self.size, got: bits.len() });
        }
        Ok(self.coeffs.iter().filter(|(&(i, j), _)| bits[i] != 0 && bits[j] != 0).map(|(_, v)| v).sum())
    }
}
