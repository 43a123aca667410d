//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

mod common;
#[path = "../../core/tests/support/laws.rs"]
mod laws;

use std::path::Path;
use std::time::{Duration, Instant};

use advisor_core::advisor::SortMode;
use advisor_core::catalog::{Catalog, DistanceMatrix, ProblemInstance};
use advisor_core::estimator::{estimate_per_topology, Topology};
use advisor_core::qubo::{brute_force_tsp, build_tsp_qubo, decode_order, PenaltyWeights};
use advisor_core::registry::{load_snapshot, RegistryError, RegistrySnapshot};
use common::{cli, fixture, post, registry_arg};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn worked_example() -> Outcome {
    let catalog = Catalog::builtin();
    let instance = ProblemInstance::tsp(4).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (num_var, qubits) =
        estimate_per_topology(&catalog, &instance, Topology::defaults().iter()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(num_var == 16, format!("numVar = {num_var}"))?;
    ensure(elapsed < Duration::from_millis(1), format!("took {elapsed:?}"))?;
    Ok(format!("TSP n=4 gives numVar 16 ({qubits:?}) in {elapsed:?}"))
}

#[allow(clippy::needless_range_loop)]
fn seeded_matrix(n: usize, seed: u64) -> DistanceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAC1D ^ (seed << 8) ^ n as u64);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = f64::from(rng.gen_range(0u32..=30));
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    DistanceMatrix::from_rows(rows).unwrap()
}

/// Shortest Hamiltonian cycle by enumerating every permutation (Heap's algorithm).
fn permutation_optimum(d: &DistanceMatrix) -> f64 {
    let n = d.order();
    let cost = |p: &[usize]| (0..n).map(|k| d.get(p[k], p[(k + 1) % n])).sum::<f64>();
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut best = cost(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i)
            } else {
                p.swap(c[i], i)
            }
            best = best.min(cost(&p));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

struct Sweep {
    min_energy: f64,
    argmin: u64,
    max_valid: f64,
    min_invalid: f64,
}

/// Visits all 2^N assignments in Gray-code order, updating the energy and
/// the one-hot bookkeeping incrementally with each single-bit flip.
fn enumerate(diag: &[f64], pair: &[Vec<f64>], n: usize) -> Sweep {
    let size = n * n;
    let mut x = vec![false; size];
    let mut field = diag.to_vec();
    let mut energy = 0.0;
    let mut rows = vec![0i32; n];
    let mut cols = vec![0i32; n];
    let mut off = 2 * n; // rows and columns whose count is not exactly one
    let mut mask = 0u64;
    let mut s = Sweep { min_energy: 0.0, argmin: 0, max_valid: f64::NEG_INFINITY, min_invalid: 0.0 };
    for step in 1u64..1 << size {
        let i = step.trailing_zeros() as usize;
        let up = !x[i];
        let sign = if up { 1.0 } else { -1.0 };
        energy += sign * field[i];
        for (f, w) in field.iter_mut().zip(&pair[i]) {
            *f += sign * w;
        }
        x[i] = up;
        mask ^= 1 << i;
        let delta = if up { 1 } else { -1 };
        for count in [&mut rows[i / n], &mut cols[i % n]] {
            let before = *count == 1;
            *count += delta;
            match (before, *count == 1) {
                (true, false) => off += 1,
                (false, true) => off -= 1,
                _ => {}
            }
        }
        if energy < s.min_energy {
            s.min_energy = energy;
            s.argmin = mask;
        }
        if off == 0 {
            s.max_valid = s.max_valid.max(energy);
        } else {
            s.min_invalid = s.min_invalid.min(energy);
        }
    }
    s
}

fn qubo_correctness() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 2..=5usize {
        for seed in 0..20u64 {
            let d = seeded_matrix(n, seed);
            let instance = ProblemInstance::tsp(n).and_then(|i| i.with_distances(d.clone())).unwrap();
            let q = build_tsp_qubo(&instance, PenaltyWeights::default_for(&instance)).map_err(|e| e.to_string())?;
            let size = n * n;
            let mut diag = vec![0.0; size];
            let mut pair = vec![vec![0.0; size]; size];
            for ((i, j), c) in q.coefficients() {
                if i == j {
                    diag[i] += c;
                } else {
                    pair[i][j] += c;
                    pair[j][i] += c;
                }
            }
            let sweep = enumerate(&diag, &pair, n);
            let ctx = format!("n={n} seed={seed}");

            // (a) the minimiser is a permutation matrix
            let bits: Vec<u8> = (0..size).map(|k| (sweep.argmin >> k & 1) as u8).collect();
            let one_hot = (0..n).all(|a| {
                (0..n).map(|b| bits[a * n + b]).sum::<u8>() == 1 && (0..n).map(|b| bits[b * n + a]).sum::<u8>() == 1
            });
            ensure(one_hot, format!("{ctx}: global minimum is not a permutation matrix"))?;
            let order = decode_order(&bits, n).ok_or(format!("{ctx}: minimum does not decode"))?;
            let direct = q.evaluate(&bits).map_err(|e| e.to_string())?;
            ensure(direct == sweep.min_energy, format!("{ctx}: enumerated {} vs direct {direct}", sweep.min_energy))?;

            // (b) its tour cost equals the exact optimum
            let cost: f64 = (0..n).map(|k| d.get(order[k], order[(k + 1) % n])).sum();
            let exact = brute_force_tsp(&instance).map_err(|e| e.to_string())?.cost;
            let reference = permutation_optimum(&d);
            ensure(
                cost == exact && exact == reference,
                format!("{ctx}: decoded {cost}, brute force {exact}, permutations {reference}"),
            )?;

            // (c) every invalid assignment lies strictly above every valid one
            ensure(
                sweep.min_invalid > sweep.max_valid,
                format!("{ctx}: invalid {} <= valid {}", sweep.min_invalid, sweep.max_valid),
            )?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(120), format!("took {elapsed:?}"))?;
    Ok(format!("{checked} instances, n=2..5, exhaustive enumeration in {:.1?}", elapsed))
}

fn ranking_laws() -> Outcome {
    let (mut violations, mut boundary, mut ties, mut benchmarked) = (Vec::new(), 0, 0, 0);
    for seed in 0..1000u64 {
        let f = laws::fixture(seed);
        for v in laws::check_with_shuffle(&f, seed.wrapping_mul(0x9E37_79B9)) {
            violations.push(format!("seed {seed}: {v}"));
        }
        let n = f.instance.n as u64;
        if let Some(set) = f.snapshot.benchmarks.get("tsp") {
            let dists: Vec<u64> = set.rows.iter().map(|r| r.main_param.abs_diff(n)).collect();
            if let Some(&m) = dists.iter().min() {
                boundary += usize::from(m * 10 == n);
                ties += usize::from(dists.iter().filter(|&&x| x == m).count() > 1);
            }
        }
        if let Ok(r) = laws::run(&f) {
            benchmarked += usize::from(r.sort_mode == SortMode::Benchmarked);
        }
    }
    ensure(violations.is_empty(), format!("{} violations, first: {}", violations.len(), violations.join("; ")))?;
    ensure(boundary > 0 && ties > 0, format!("coverage: {boundary} boundary, {ties} tie fixtures"))?;
    Ok(format!(
        "1000 fixtures, 0 violations ({benchmarked} benchmarked, {boundary} at the 10% boundary, {ties} with equidistant rows)"
    ))
}

fn evaluation_method() -> Outcome {
    let reg = registry_arg("evaluation");
    let args = ["--registry", reg.as_str(), "evaluate", "--problem", "tsp", "--nodes", "5", "--seed", "7", "--json"];
    let start = Instant::now();
    let first = cli(&args);
    let elapsed = start.elapsed();
    let second = cli(&args);
    ensure(first.status.code() == Some(0), format!("exit {:?}", first.status.code()))?;
    ensure(first.stdout == second.stdout, "reruns differ")?;
    ensure(elapsed <= Duration::from_secs(30), format!("took {elapsed:?}"))?;

    let report: Value = serde_json::from_slice(&first.stdout).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = serde_json::from_value(report["distances"].clone()).map_err(|e| e.to_string())?;
    let d = DistanceMatrix::from_rows(rows).map_err(|e| e.to_string())?;
    let optimum = permutation_optimum(&d);
    ensure(report["optimum"]["cost"].as_f64() == Some(optimum), "reported optimum disagrees with enumeration")?;

    let runs = report["runs"].as_array().ok_or("no runs")?;
    ensure(runs.len() == 2, "expected two runs")?;
    let qualities: Vec<_> = runs.iter().map(|r| r["solutionQuality"].as_u64()).collect();
    ensure(qualities == [Some(100), Some(40)], format!("qualities {qualities:?}"))?;
    let mut deviations = Vec::new();
    for r in runs {
        let order: Vec<usize> = serde_json::from_value(r["tour"]["order"].clone()).map_err(|e| e.to_string())?;
        let cost: f64 = (0..5).map(|k| d.get(order[k], order[(k + 1) % 5])).sum();
        let dev = 100.0 * (cost - optimum) / optimum;
        ensure(r["deviationPct"].as_f64() == Some(dev), format!("deviation {} vs {dev}", r["deviationPct"]))?;
        deviations.push(dev);
    }
    ensure(deviations[0] == 0.0, format!("top solver deviates {}%", deviations[0]))?;
    ensure(deviations.windows(2).all(|w| w[0] <= w[1]), format!("not monotone: {deviations:?}"))?;
    ensure(report["verdict"] == "PASS", format!("verdict {}", report["verdict"]))?;
    Ok(format!("deviations {deviations:?}, PASS, bit-identical rerun, {elapsed:.2?}"))
}

fn registry_robustness() -> Outcome {
    let load = |name: &str| RegistrySnapshot::load_dir(&fixture(name));
    match load("broken/unsorted") {
        Err(RegistryError::UnsortedBenchmark { problem_id, row_index: 2 }) if problem_id == "tsp" => {}
        other => return Err(format!("unsorted: {other:?}")),
    }
    match load("broken/duplicate") {
        Err(RegistryError::DuplicateId { kind: "solver", id }) if id == "qpu-a" => {}
        other => return Err(format!("duplicate: {other:?}")),
    }
    match load("broken/unknown_topology") {
        Err(RegistryError::UnknownTopology { solver_id, topology })
            if solver_id == "qpu-x" && topology == "hexagonal" => {}
        other => return Err(format!("unknown topology: {other:?}")),
    }
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../registry");
    for dir in [fixture("golden"), fixture("evaluation"), fixture("tiny"), shipped] {
        let snapshot = RegistrySnapshot::load_dir(&dir).map_err(|e| format!("{}: {e}", dir.display()))?.snapshot;
        let again = load_snapshot(&snapshot.to_documents()).map_err(|e| e.to_string())?.snapshot;
        ensure(again == snapshot, format!("{} does not round-trip", dir.display()))?;
    }
    Ok("3 broken fixtures rejected with the expected errors; 4 valid snapshots round-trip".into())
}

fn api_conformance() -> Outcome {
    let golden = std::fs::read_to_string(fixture("golden/recommend_tsp_n4.json")).map_err(|e| e.to_string())?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let reply =
        runtime.block_on(post(common::app("golden"), "/api/recommend", r#"{"problemId": "tsp", "params": {"n": 4}}"#));
    ensure(reply.status == 200, format!("status {}", reply.status))?;
    ensure(reply.body == golden, "HTTP body differs from the golden body")?;
    let reg = registry_arg("golden");
    let out = cli(&["--registry", &reg, "recommend", "--problem", "tsp", "--nodes", "4", "--json"]);
    ensure(out.status.code() == Some(0), format!("CLI exit {:?}", out.status.code()))?;
    ensure(out.stdout == reply.body.as_bytes(), "CLI --json differs from the HTTP body")?;
    Ok(format!("golden body ({} bytes) from HTTP and CLI --json, byte-identical", golden.len()))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("worked example", worked_example),
        ("QUBO correctness", qubo_correctness),
        ("ranking laws", ranking_laws),
        ("evaluation method", evaluation_method),
        ("registry robustness", registry_robustness),
        ("API conformance", api_conformance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
