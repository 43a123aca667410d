use serde::Serialize;

use super::{Qubo, QuboError};
use crate::catalog::{DistanceMatrix, ProblemInstance};

/// Exhaustive tour search is refused above this node count.
pub const MAX_BRUTE_FORCE_NODES: usize = 10;

/// Weight `c1` on the constraint terms and `c2` on the tour-length objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyWeights {
    pub c1: f64,
    pub c2: f64,
}

impl PenaltyWeights {
    /// `c1 = 2 · n · max distance`, `c2 = 1`.
    ///
    /// Any assignment that breaks a one-hot constraint pays at least `2 · c1`,
    /// more than the longest possible tour costs, so valid tours always win.
    pub fn default_for(instance: &ProblemInstance) -> Self {
        let max_d = instance.distance_matrix().max_finite();
        let c1 = if max_d > 0.0 { 2.0 * instance.n as f64 * max_d } else { 1.0 };
        Self { c1, c2: 1.0 }
    }

    /// Energy shift shared by every assignment that encodes a permutation.
    ///
    /// The QUBO drops the constant `+1` of each of the `2n` squared one-hot
    /// terms, so a valid tour evaluates to `c2 · cost - 2 · n · c1`.
    pub fn valid_tour_offset(&self, n: usize) -> f64 {
        -2.0 * n as f64 * self.c1
    }
}

/// Bit index of "node `node` sits at tour position `position`".
#[inline]
pub fn var_index(node: usize, position: usize, n: usize) -> usize {
    node * n + position
}

/// Builds the one-hot TSP QUBO on `n²` variables: each node takes exactly
/// one position, each position holds exactly one node, consecutive positions
/// must be joined by an existing edge, and the objective is the tour length
/// including the closing edge.
pub fn build_tsp_qubo(instance: &ProblemInstance, weights: PenaltyWeights) -> Result<Qubo, QuboError> {
    instance.validate().map_err(|e| QuboError::InvalidInstance(e.to_string()))?;
    let PenaltyWeights { c1, c2 } = weights;
    if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(QuboError::InvalidWeights { c1, c2 });
    }
    let n = instance.n;
    let d = instance.distance_matrix();
    let mut q = Qubo::new(n * n);

    // (1 - Σ x)² = 1 - Σ x + 2 Σ_{a<b} x_a x_b on binary x; the constant is dropped.
    let mut one_hot = |vars: &[usize]| {
        for (a, &va) in vars.iter().enumerate() {
            q.add(va, va, -c1);
            for &vb in &vars[a + 1..] {
                q.add(va, vb, 2.0 * c1);
            }
        }
    };
    for v in 0..n {
        let row: Vec<usize> = (0..n).map(|p| var_index(v, p, n)).collect();
        one_hot(&row);
    }
    for p in 0..n {
        let col: Vec<usize> = (0..n).map(|v| var_index(v, p, n)).collect();
        one_hot(&col);
    }

    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let weight = if d.has_edge(u, v) { c2 * d.get(u, v) } else { c1 };
            for p in 0..n {
                q.add(var_index(u, p, n), var_index(v, (p + 1) % n, n), weight);
            }
        }
    }
    Ok(q)
}

/// A closed tour; `cost` includes the edge from the last node back to the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    /// Panics if `order` is not a permutation of `0..distances.order()`.
    pub fn from_order(order: Vec<usize>, distances: &DistanceMatrix) -> Self {
        let n = distances.order();
        assert_eq!(order.len(), n, "tour length");
        let mut seen = vec![false; n];
        for &v in &order {
            assert!(v < n && !seen[v], "tour order is not a permutation: {order:?}");
            seen[v] = true;
        }
        let cost = cycle_cost(&order, distances);
        Self { order, cost }
    }
}

fn cycle_cost(order: &[usize], d: &DistanceMatrix) -> f64 {
    let n = order.len();
    (0..n).map(|i| d.get(order[i], order[(i + 1) % n])).sum()
}

/// Reads a node order from an `n × n` assignment grid. Returns `None` unless
/// every node row and every position column holds exactly one set bit.
pub fn decode_order(bits: &[u8], n: usize) -> Option<Vec<usize>> {
    if bits.len() != n * n {
        return None;
    }
    let mut order = vec![usize::MAX; n];
    for v in 0..n {
        let mut row_sum = 0;
        for (p, slot) in order.iter_mut().enumerate() {
            if bits[var_index(v, p, n)] != 0 {
                row_sum += 1;
                if *slot != usize::MAX {
                    return None;
                }
                *slot = v;
            }
        }
        if row_sum != 1 {
            return None;
        }
    }
    // n rows with one bit each and no shared column fill every position.
    Some(order)
}

pub fn decode_tour(bits: &[u8], instance: &ProblemInstance) -> Option<Tour> {
    decode_order(bits, instance.n).map(|order| Tour::from_order(order, &instance.distance_matrix()))
}

pub fn encode_tour(order: &[usize]) -> Vec<u8> {
    let n = order.len();
    let mut bits = vec![0; n * n];
    for (p, &v) in order.iter().enumerate() {
        bits[var_index(v, p, n)] = 1;
    }
    bits
}

/// Rearranges `xs` into the next lexicographic permutation; false after the last.
fn next_permutation(xs: &mut [usize]) -> bool {
    let Some(i) = xs.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = xs.iter().rposition(|&x| x > xs[i]).expect("pivot has a successor");
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

/// Minimum-cost tour by enumerating every order that starts at node 0.
/// Among equal-cost tours the lexicographically smallest order wins.
pub fn brute_force_tsp(instance: &ProblemInstance) -> Result<Tour, QuboError> {
    instance.validate().map_err(|e| QuboError::InvalidInstance(e.to_string()))?;
    let n = instance.n;
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(QuboError::TooLarge(n));
    }
    let d = instance.distance_matrix();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let cost = cycle_cost(&order, &d);
        if cost.is_finite() && best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, order.clone()));
        }
        if !next_permutation(&mut order[1..]) {
            break;
        }
    }
    let (cost, order) = best.ok_or(QuboError::NoFeasibleTour)?;
    Ok(Tour { order, cost })
}

/// Percentage by which `candidate` is longer than `optimum`.
pub fn deviation_pct(candidate: &Tour, optimum: &Tour) -> Result<f64, QuboError> {
    if optimum.cost == 0.0 {
        return Err(QuboError::ZeroOptimum);
    }
    Ok(100.0 * (candidate.cost - optimum.cost) / optimum.cost)
}
