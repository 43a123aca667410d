//! Ranking check against a classical optimum.
//!
//! A seeded random TSP instance is solved exactly by enumeration, then each
//! selected solver is emulated by simulated annealing with a sweep budget
//! proportional to its benchmark score. A ranking passes when deviation from
//! the optimum never decreases down the list.

use std::fmt::Write as _;
use std::str::FromStr;

use advisor_core::advisor::{recommend, AdvisorError, RankedSolver, SortMode};
use advisor_core::catalog::{Catalog, DistanceMatrix, ProblemInstance, TSP};
use advisor_core::qubo::{brute_force_tsp, build_tsp_qubo, deviation_pct, sample, AnnealParams, PenaltyWeights, Tour};
use advisor_core::registry::RegistrySnapshot;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

pub const MIN_NODES: usize = 3;
pub const MAX_NODES: usize = 8;
pub const DEFAULT_BASE_SWEEPS: usize = 1000;
pub const DEFAULT_RESTARTS: usize = 4;
const MAX_EDGE_LENGTH: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    Top,
    Second,
    Last,
    Rank(usize),
    Id(String),
}

impl FromStr for Selector {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "" => return Err(ConfigError("empty solver selector".into())),
            "top" | "first" => Self::Top,
            "second" => Self::Second,
            "last" => Self::Last,
            s => match s.parse::<usize>() {
                Ok(0) => return Err(ConfigError("ranks start at 1".into())),
                Ok(k) => Self::Rank(k),
                Err(_) => Self::Id(s.to_string()),
            },
        })
    }
}

pub fn parse_selectors(list: &str) -> Result<Vec<Selector>, ConfigError> {
    list.split(',').map(str::parse).collect()
}

#[derive(Debug, Clone)]
pub struct EvaluationConfig {
    pub problem_id: String,
    pub nodes: usize,
    pub seed: u64,
    pub selectors: Vec<Selector>,
    /// Sweeps granted to a solver with a 100 % benchmark score.
    pub base_sweeps: usize,
    pub restarts: usize,
}

impl EvaluationConfig {
    pub fn new(nodes: usize, seed: u64, selectors: Vec<Selector>) -> Self {
        Self {
            problem_id: TSP.into(),
            nodes,
            seed,
            selectors,
            base_sweeps: DEFAULT_BASE_SWEEPS,
            restarts: DEFAULT_RESTARTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolverRun {
    pub rank: usize,
    pub solver_id: String,
    pub solution_quality: Option<u8>,
    pub sweeps: usize,
    pub energy: f64,
    /// `None` when the best sample breaks a one-hot constraint.
    pub tour: Option<Tour>,
    pub deviation_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationReport {
    pub problem_id: String,
    pub nodes: usize,
    pub seed: u64,
    pub distances: Vec<Vec<f64>>,
    pub optimum: Tour,
    pub sort_mode: SortMode,
    pub runs: Vec<SolverRun>,
    /// Absent when fewer than two solvers were run or no benchmark applied.
    pub verdict: Option<Verdict>,
}

/// Symmetric matrix with integer edge lengths in `1..=20` drawn from `seed`.
#[allow(clippy::needless_range_loop)]
pub fn random_distances(n: usize, seed: u64) -> DistanceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = f64::from(rng.gen_range(1..=MAX_EDGE_LENGTH));
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    DistanceMatrix::from_rows(rows).expect("generated matrix is valid")
}

/// Deviations must be non-decreasing down the ranking; an invalid sample
/// counts as infinitely far from the optimum.
pub fn verdict(runs: &[SolverRun]) -> Option<Verdict> {
    if runs.len() < 2 {
        return None;
    }
    let dev = |r: &SolverRun| r.deviation_pct.unwrap_or(f64::INFINITY);
    let monotone = runs.windows(2).all(|w| dev(&w[0]) <= dev(&w[1]));
    Some(if monotone { Verdict::Pass } else { Verdict::Fail })
}

/// Sweeps for a solver with the given score. Without benchmark scores every
/// solver gets the full budget; an unscored solver in a benchmarked ranking
/// gets the minimum.
pub fn sweeps_for(mode: SortMode, quality: Option<u8>, base_sweeps: usize) -> usize {
    let q = match (mode, quality) {
        (SortMode::Default, _) => 100,
        (SortMode::Benchmarked, q) => usize::from(q.unwrap_or(0)),
    };
    (base_sweeps * q).div_ceil(100).max(1)
}

pub fn run_evaluation(
    catalog: &Catalog,
    snapshot: &RegistrySnapshot,
    config: &EvaluationConfig,
) -> Result<EvaluationReport, ConfigError> {
    if config.problem_id != TSP {
        return Err(ConfigError(format!("evaluation supports only `{TSP}`, got `{}`", config.problem_id)));
    }
    if !(MIN_NODES..=MAX_NODES).contains(&config.nodes) {
        return Err(ConfigError(format!("--nodes must be within {MIN_NODES}..={MAX_NODES}, got {}", config.nodes)));
    }
    if config.selectors.is_empty() || config.base_sweeps == 0 || config.restarts == 0 {
        return Err(ConfigError("need at least one solver, one sweep and one restart".into()));
    }

    let instance = ProblemInstance::tsp(config.nodes)
        .and_then(|i| i.with_distances(random_distances(config.nodes, config.seed)))
        .map_err(|e| ConfigError(e.to_string()))?;
    let recommendation = recommend(catalog, snapshot, &instance).map_err(|e| match e {
        AdvisorError::NoCandidates { num_var, .. } => {
            ConfigError(format!("no solver in the registry can hold {num_var} variables"))
        }
        e => ConfigError(e.to_string()),
    })?;
    let ranked = &recommendation.ranked;

    let mut picked = Vec::new();
    for sel in &config.selectors {
        let found = match sel {
            Selector::Top => ranked.first(),
            Selector::Second => ranked.get(1),
            Selector::Last => ranked.last(),
            Selector::Rank(k) => ranked.get(k - 1),
            Selector::Id(id) => ranked.iter().find(|r| r.solver.id == *id),
        };
        let found = found.ok_or_else(|| ConfigError(format!("selector {sel:?} matches no ranked solver")))?;
        if !picked.iter().any(|p: &&RankedSolver| p.rank == found.rank) {
            picked.push(found);
        }
    }
    picked.sort_by_key(|r| r.rank);

    let optimum = brute_force_tsp(&instance).map_err(|e| ConfigError(e.to_string()))?;
    let qubo =
        build_tsp_qubo(&instance, PenaltyWeights::default_for(&instance)).map_err(|e| ConfigError(e.to_string()))?;

    let runs: Vec<SolverRun> = picked
        .into_iter()
        .map(|r| {
            let sweeps = sweeps_for(recommendation.sort_mode, r.solution_quality, config.base_sweeps);
            let params =
                AnnealParams { seed: config.seed.wrapping_add(r.rank as u64), sweeps, restarts: config.restarts };
            let result = sample(&qubo, params).decode_for(&instance);
            let deviation_pct =
                result.decoded.as_ref().map(|t| deviation_pct(t, &optimum).expect("generated edges are at least 1"));
            SolverRun {
                rank: r.rank,
                solver_id: r.solver.id.clone(),
                solution_quality: r.solution_quality,
                sweeps,
                energy: result.energy,
                tour: result.decoded,
                deviation_pct,
            }
        })
        .collect();

    Ok(EvaluationReport {
        problem_id: instance.problem_id.clone(),
        nodes: config.nodes,
        seed: config.seed,
        distances: instance.distance_matrix().rows(),
        optimum,
        sort_mode: recommendation.sort_mode,
        verdict: match recommendation.sort_mode {
            SortMode::Benchmarked => verdict(&runs),
            SortMode::Default => None,
        },
        runs,
    })
}

pub fn render_report(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "TSP with {} nodes (seed {}); optimum {:?} cost {}",
        report.nodes, report.seed, report.optimum.order, report.optimum.cost
    );
    let _ = writeln!(out, "ranking mode: {:?}", report.sort_mode);
    let _ = writeln!(out, "{:<5} {:<32} {:>7} {:>7} {:>10}  TOUR", "RANK", "SOLVER", "SCORE", "SWEEPS", "DEVIATION");
    for r in &report.runs {
        let score = r.solution_quality.map_or("-".into(), |q| q.to_string());
        let dev = r.deviation_pct.map_or("invalid".into(), |d| format!("{d:.2}%"));
        let tour = r.tour.as_ref().map_or("-".into(), |t| format!("{:?} cost {}", t.order, t.cost));
        let _ = writeln!(out, "{:<5} {:<32} {:>7} {:>7} {:>10}  {}", r.rank, r.solver_id, score, r.sweeps, dev, tour);
    }
    match report.verdict {
        Some(Verdict::Pass) => out.push_str("verdict: PASS\n"),
        Some(Verdict::Fail) => out.push_str("verdict: FAIL\n"),
        None if report.runs.len() < 2 => out.push_str("verdict: n/a (fewer than two solvers)\n"),
        None => out.push_str("verdict: n/a (no benchmark scores to check)\n"),
    }
    out
}
