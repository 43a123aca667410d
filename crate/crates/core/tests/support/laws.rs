//! Randomized registries and an independent checker for the ranking laws.

use std::collections::BTreeMap;

use advisor_core::advisor::{
    recommend, AdvisorError, BenchmarkRow, BenchmarkSet, Recommendation, Solver, SolverKind, SortMode,
};
use advisor_core::catalog::{Catalog, ProblemInstance};
use advisor_core::estimator::Topology;
use advisor_core::registry::RegistrySnapshot;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOPOLOGIES: [(&str, u64); 3] = [("chimera", 4), ("pegasus", 12), ("zephyr", 16)];

#[derive(Debug, Clone)]
pub struct Fixture {
    pub snapshot: RegistrySnapshot,
    pub instance: ProblemInstance,
}

fn divisor(topology: &str) -> u64 {
    TOPOLOGIES.iter().find(|(t, _)| *t == topology).map(|(_, d)| *d).unwrap()
}

/// Qubits for `v` variables: v chains of ceil(v / D) qubits.
fn qubits_needed(v: u64, d: u64) -> u64 {
    v * v.div_ceil(d)
}

fn num_var(f: &Fixture) -> u64 {
    (f.instance.n * f.instance.n) as u64
}

fn fits(s: &Solver, v: u64) -> bool {
    match s.kind {
        SolverKind::Hybrid => s.max_variables >= v,
        SolverKind::Qpu => s.max_qubits >= qubits_needed(v, divisor(s.topology.as_deref().unwrap())),
    }
}

fn main_params(rng: &mut ChaCha8Rng, n: u64) -> Vec<u64> {
    let mut params: Vec<u64> = (0..rng.gen_range(0..=5)).map(|_| rng.gen_range(1..=70)).collect();
    let d = n / 10;
    match rng.gen_range(0..5) {
        // exactly on the 10 % boundary
        0 => params.push(n + d),
        1 => params.push(n - d),
        // equidistant pair
        2 if n > 2 => {
            let e = rng.gen_range(1..n.min(8));
            params.extend([n - e, n + e]);
        }
        // just outside the boundary
        3 => params.push(n + d + 1),
        _ => {}
    }
    params.retain(|&p| p > 0);
    params.sort_unstable();
    params
}

/// A registry whose capacities straddle the instance's needs, with small
/// value pools so equal sort keys are common.
pub fn fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = if rng.gen_bool(0.3) { 10 * rng.gen_range(1..=6) } else { rng.gen_range(2..=60) };
    let v = (n * n) as u64;

    let mut solvers = Vec::new();
    for k in 0..rng.gen_range(0..=12) {
        let mut s = Solver {
            id: format!("s{k}"),
            name: format!("solver-{k}"),
            kind: SolverKind::Hybrid,
            max_qubits: 0,
            max_variables: 0,
            topology: None,
            price_ref: None,
            description: String::new(),
        };
        if rng.gen_bool(0.6) {
            let (t, d) = *TOPOLOGIES.choose(&mut rng).unwrap();
            let need = qubits_needed(v, d);
            s.kind = SolverKind::Qpu;
            s.topology = Some(t.into());
            s.max_qubits = *[need / 2, need - 1, need, need + 1, 2 * need, 5000].choose(&mut rng).unwrap();
            s.max_qubits = s.max_qubits.max(1);
            if rng.gen_bool(0.2) {
                s.max_variables = *[v, 5000].choose(&mut rng).unwrap();
            }
        } else {
            s.max_variables = *[v - 1, v, 2 * v, 1_000_000].choose(&mut rng).unwrap();
            if rng.gen_bool(0.2) {
                s.max_qubits = *[0, 5000].choose(&mut rng).unwrap();
            }
        }
        solvers.push(s);
    }

    let mut benchmarks = BTreeMap::new();
    if rng.gen_bool(0.85) {
        let mut names: Vec<String> = solvers.iter().filter(|_| rng.gen_bool(0.7)).map(|s| s.name.clone()).collect();
        if rng.gen_bool(0.3) {
            names.push("ghost".into());
        }
        names.shuffle(&mut rng);
        let rows = main_params(&mut rng, n as u64)
            .into_iter()
            .map(|main_param| BenchmarkRow {
                main_param,
                scores: names.iter().map(|_| *[0, 40, 70, 70, 100].choose(&mut rng).unwrap()).collect(),
            })
            .collect();
        benchmarks.insert("tsp".to_string(), BenchmarkSet { problem_id: "tsp".into(), solver_names: names, rows });
    }

    let topologies = TOPOLOGIES.iter().map(|(t, d)| (t.to_string(), Topology::new(t, *d, ""))).collect();
    Fixture {
        snapshot: RegistrySnapshot { solvers, benchmarks, topologies, prices: BTreeMap::new() },
        instance: ProblemInstance::tsp(n).unwrap(),
    }
}

/// Same registry with the solver list permuted.
pub fn shuffled(f: &Fixture, seed: u64) -> Fixture {
    let mut g = f.clone();
    g.snapshot.solvers.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    g
}

/// Nearest row by linear scan, first one on ties, kept only within 10 %.
pub fn nearest_row(rows: &[BenchmarkRow], n: u64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, r) in rows.iter().enumerate() {
        match best {
            Some(b) if rows[b].main_param.abs_diff(n) <= r.main_param.abs_diff(n) => {}
            _ => best = Some(j),
        }
    }
    best.filter(|&b| rows[b].main_param.abs_diff(n) * 10 <= n)
}

fn quality(set: &BenchmarkSet, row: usize, s: &Solver) -> Option<u8> {
    set.solver_names.iter().position(|x| *x == s.name).map(|k| set.rows[row].scores[k])
}

/// Sort key of a ranked entry: scored entries outrank unscored ones.
fn key(s: &Solver, q: Option<u8>) -> (bool, u8, u64, u64) {
    (q.is_some(), q.unwrap_or(0), s.max_variables, s.max_qubits)
}

pub fn run(f: &Fixture) -> Result<Recommendation, AdvisorError> {
    recommend(&Catalog::builtin(), &f.snapshot, &f.instance)
}

/// Every law the recommendation for `f` must satisfy; empty when all hold.
pub fn violations(f: &Fixture, result: &Result<Recommendation, AdvisorError>) -> Vec<String> {
    let mut out = Vec::new();
    let v = num_var(f);
    let n = f.instance.n as u64;
    let expected: Vec<&Solver> = f.snapshot.solvers.iter().filter(|s| fits(s, v)).collect();

    let rec = match result {
        Err(AdvisorError::NoCandidates { num_var, .. }) if expected.is_empty() && *num_var == v => return out,
        Err(e) => {
            out.push(format!("unexpected error {e:?} with {} fitting solvers", expected.len()));
            return out;
        }
        Ok(r) => r,
    };
    if expected.is_empty() {
        out.push("ranking returned although no solver fits".into());
        return out;
    }
    if rec.num_var != v {
        out.push(format!("numVar {} != {v}", rec.num_var));
    }
    for (t, d) in TOPOLOGIES {
        if rec.qubits_by_topology.get(t) != Some(&qubits_needed(v, d)) {
            out.push(format!("qubit estimate for {t} is {:?}", rec.qubits_by_topology.get(t)));
        }
    }

    // total order: ranks 1..=k, each fitting solver exactly once
    for (k, r) in rec.ranked.iter().enumerate() {
        if r.rank != k + 1 {
            out.push(format!("rank {} at position {k}", r.rank));
        }
    }
    let mut got: Vec<&str> = rec.ranked.iter().map(|r| r.solver.id.as_str()).collect();
    let mut want: Vec<&str> = expected.iter().map(|s| s.id.as_str()).collect();
    got.sort_unstable();
    want.sort_unstable();
    if got != want {
        out.push(format!("ranked {got:?}, fitting {want:?}"));
        return out;
    }

    let set = f.snapshot.benchmarks.get("tsp");
    let row = set.and_then(|s| nearest_row(&s.rows, n));
    let benchmarked = match (set, row) {
        (Some(s), Some(j)) => expected.iter().any(|c| quality(s, j, c).is_some()),
        _ => false,
    };
    let mode = if benchmarked { SortMode::Benchmarked } else { SortMode::Default };
    if rec.sort_mode != mode {
        out.push(format!("mode {:?}, expected {mode:?}", rec.sort_mode));
    }
    let used = rec.benchmark_row_used.as_ref().map(|m| m.index);
    if used != row.filter(|_| benchmarked) {
        out.push(format!("benchmark row {used:?}, oracle {row:?}"));
    }

    let position = |id: &str| f.snapshot.solvers.iter().position(|s| s.id == id).unwrap();
    for r in &rec.ranked {
        let q = match (benchmarked, set, row) {
            (true, Some(s), Some(j)) => quality(s, j, &r.solver),
            _ => None,
        };
        if r.solution_quality != q {
            out.push(format!("{} has quality {:?}, expected {q:?}", r.solver.id, r.solution_quality));
        }
    }
    for w in rec.ranked.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ka, kb) = (key(&a.solver, a.solution_quality), key(&b.solver, b.solution_quality));
        if ka < kb {
            out.push(format!("{} ranked above {} with smaller key {ka:?} < {kb:?}", a.solver.id, b.solver.id));
        }
        if ka == kb && position(&a.solver.id) > position(&b.solver.id) {
            out.push(format!("tie between {} and {} breaks input order", a.solver.id, b.solver.id));
        }
    }
    out
}

/// Laws for `f` and for a shuffled copy, plus agreement of the two key sequences.
pub fn check_with_shuffle(f: &Fixture, seed: u64) -> Vec<String> {
    let a = run(f);
    let mut out = violations(f, &a);
    let g = shuffled(f, seed);
    let b = run(&g);
    out.extend(violations(&g, &b).into_iter().map(|v| format!("shuffled: {v}")));
    if let (Ok(a), Ok(b)) = (&a, &b) {
        let keys =
            |r: &Recommendation| -> Vec<_> { r.ranked.iter().map(|x| key(&x.solver, x.solution_quality)).collect() };
        if keys(a) != keys(b) {
            out.push("key sequence changed under shuffle".into());
        }
    }
    out
}
