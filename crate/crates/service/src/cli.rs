use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use advisor_core::advisor::{SolverKind, SortMode};
use advisor_core::catalog::Catalog;
use advisor_core::registry::{RegistrySnapshot, PROBLEMS_FILE};
use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::evaluate::{self, EvaluationConfig, Verdict};
use crate::request::{encode, recommend_response, RecommendRequest, RecommendResponse};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERDICT_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "annealer-advisor", version, about = "Recommend quantum-annealer solvers for optimization problems")]
pub struct Cli {
    /// Directory holding solvers.json, benchmarks.json, topologies.json, prices.json.
    #[arg(long, global = true, env = "QCADVISER_REGISTRY", default_value = "registry")]
    pub registry: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve the HTTP API.
    Serve(ServeArgs),
    /// Estimate resources and print the ranked solver list.
    Recommend(RecommendArgs),
    /// Check the ranking against an exhaustively solved random instance.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "QCADVISER_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "QCADVISER_HOST", default_value = "127.0.0.1")]
    pub host: String,
    /// Allowed CORS origin for the web client; any origin when unset.
    #[arg(long, env = "QCADVISER_CORS_ORIGIN")]
    pub cors_origin: Option<String>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub nodes: u64,
    /// JSON file with a symmetric distance matrix (`null` for missing edges).
    #[arg(long)]
    pub distances: Option<PathBuf>,
    /// Print the API response body instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub seed: u64,
    /// Comma-separated: top, second, last, a rank number, or a solver id.
    #[arg(long, default_value = "top,second")]
    pub solvers: String,
    /// Annealing sweeps for a solver with a 100 % benchmark score.
    #[arg(long, default_value_t = evaluate::DEFAULT_BASE_SWEEPS)]
    pub sweeps: usize,
    #[arg(long, default_value_t = evaluate::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long)]
    pub json: bool,
}

/// Catalog (built-ins plus the registry's `problems.json`) and solver snapshot.
pub fn load_registry(dir: &Path, warn: &mut dyn Write) -> Result<(Catalog, RegistrySnapshot), String> {
    if !dir.is_dir() {
        return Err(format!("registry directory {} does not exist", dir.display()));
    }
    let mut catalog = Catalog::builtin();
    let problems = dir.join(PROBLEMS_FILE);
    if problems.exists() {
        let text = std::fs::read_to_string(&problems).map_err(|e| format!("{}: {e}", problems.display()))?;
        catalog.merge_problems_json(&text).map_err(|e| e.to_string())?;
    }
    let loaded = RegistrySnapshot::load_dir(dir).map_err(|e| e.to_string())?;
    for w in &loaded.warnings {
        let _ = writeln!(warn, "warning: {w}");
    }
    Ok((catalog, loaded.snapshot))
}

pub fn recommend_request(args: &RecommendArgs) -> Result<RecommendRequest, String> {
    let mut params = Map::new();
    params.insert("n".into(), Value::from(args.nodes));
    if let Some(path) = &args.distances {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let matrix: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        params.insert("distances".into(), matrix);
    }
    Ok(RecommendRequest { problem_id: args.problem.clone(), params })
}

fn solver_kind(kind: SolverKind) -> &'static str {
    match kind {
        SolverKind::Qpu => "QPU",
        SolverKind::Hybrid => "hybrid",
    }
}

pub fn render_table(r: &RecommendResponse) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Problem: {}  ({} binary variables)", r.problem_id, r.num_var);
    let qubits: Vec<String> = r.num_qubits.iter().map(|(t, q)| format!("{t} {q}")).collect();
    let _ = writeln!(out, "Estimated qubits: {}", qubits.join(", "));
    if r.no_candidates {
        out.push_str("No suitable solver: every solver in the registry is too small for this instance.\n");
        return out;
    }
    match (&r.sort_mode, &r.benchmark) {
        (SortMode::Benchmarked, Some(b)) => {
            let _ = writeln!(out, "Ranked by benchmark score (benchmark size {})", b.main_param);
        }
        _ => out.push_str("Ranked by capacity (no matching benchmark)\n"),
    }
    let show_score = r.sort_mode == SortMode::Benchmarked;
    let _ = write!(
        out,
        "{:<5} {:<44} {:<7} {:>11} {:>14} {:>12}",
        "RANK", "SOLVER", "TYPE", "MAX QUBITS", "MAX VARIABLES", "EST. QUBITS"
    );
    if show_score {
        let _ = write!(out, " {:>6}", "SCORE");
    }
    out.push('\n');
    for s in &r.ranked_solvers {
        let est = s.estimated_qubits.map_or("-".into(), |q| q.to_string());
        let _ = write!(
            out,
            "{:<5} {:<44} {:<7} {:>11} {:>14} {:>12}",
            s.rank,
            s.name,
            solver_kind(s.kind),
            s.max_qubits,
            s.max_variables,
            est
        );
        if show_score {
            let _ = write!(out, " {:>6}", s.solution_quality.map_or("-".into(), |q| format!("{q}%")));
        }
        out.push('\n');
    }
    out
}

fn run_recommend(
    registry: &Path,
    args: &RecommendArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<u8, String> {
    let (catalog, snapshot) = load_registry(registry, err)?;
    let request = recommend_request(args)?;
    let instance = request.to_instance(&catalog).map_err(|e| e.to_string())?;
    let response = recommend_response(&catalog, &snapshot, &instance).map_err(|e| e.to_string())?;
    let text = if args.json { encode(&response) } else { render_table(&response) };
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(EXIT_OK)
}

fn run_evaluate(registry: &Path, args: &EvaluateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8, String> {
    let (catalog, snapshot) = load_registry(registry, err)?;
    let config = EvaluationConfig {
        problem_id: args.problem.clone(),
        nodes: args.nodes,
        seed: args.seed,
        selectors: evaluate::parse_selectors(&args.solvers).map_err(|e| e.to_string())?,
        base_sweeps: args.sweeps,
        restarts: args.restarts,
    };
    let report = evaluate::run_evaluation(&catalog, &snapshot, &config).map_err(|e| e.to_string())?;
    let text = if args.json { encode(&report) } else { evaluate::render_report(&report) };
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(match report.verdict {
        Some(Verdict::Fail) => EXIT_VERDICT_FAIL,
        _ => EXIT_OK,
    })
}

/// Runs a non-server command and returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Recommend(args) => run_recommend(&cli.registry, args, out, err),
        Command::Evaluate(args) => run_evaluate(&cli.registry, args, out, err),
        Command::Serve(_) => Err("`serve` runs through the async entry point".into()),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        EXIT_CONFIG
    })
}
