//! Command-line front end: `batch` runs a batching method and routes the
//! result, `oracle` prints brute-force ground truth for tiny instances, and
//! `solve-mps` exposes the embedded solver as an external-style MIP solver.
//!
//! Exit codes: 0 success, 2 validation error, 3 solver error, 4 timeout
//! without incumbent, 5 oracle refusal. Failures print one JSON object on
//! stderr: `{"error": {"kind": ..., "message": ...}}`.

use std::fmt::Display;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pickbatch_core::approx::{self, ModelConfig, Symmetry};
use pickbatch_core::heuristics::{self, PioConfig, SavingsEstimator};
use pickbatch_core::instance::Instance;
use pickbatch_core::milp::{SolveError, Solver};
use pickbatch_core::oracle::{self, OracleLimits};
use pickbatch_core::router::{self, RouteMode, DEFAULT_REVERSAL_CAP};
use serde::Serialize;

use crate::formats::instance_io::{parse_instance, ParseError};
use crate::formats::mps::read_mps;
use crate::formats::report::{deviation_pct, one_decimal, ConfigEcho, RunReport, TrolleyRoute};
use crate::formats::route_io::route_to_doc;
use crate::solver::{AnySolver, BackendConfig, BuiltinSolver, SubprocessSolver};

#[derive(Parser, Debug)]
#[command(
    name = "pickbatch",
    version,
    about = "Batch warehouse orders onto trolleys and route each trolley exactly"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
}

#[derive(Subcommand, Debug)]
pub enum CommandKind {
    /// Batch orders with the chosen method, then route every trolley.
    Batch(BatchArgs),
    /// Brute-force optima for desk-scale instances (enumeration, no solver).
    Oracle(OracleArgs),
    /// Solve a free-format MPS file with the embedded solver.
    SolveMps(SolveMpsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Exact,
    Pio,
    Savings,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum ModeArg {
    Noreversal,
    Reversal,
}

impl ModeArg {
    fn route_mode(self) -> RouteMode {
        match self {
            ModeArg::Noreversal => RouteMode::NoReversal,
            ModeArg::Reversal => RouteMode::Reversal,
        }
    }

    fn label(self) -> &'static str {
        match self {
            ModeArg::Noreversal => "noreversal",
            ModeArg::Reversal => "reversal",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum SymmetryArg {
    None,
    Basic,
    Strong,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// Instance document (JSON).
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: Method,
    /// Trolleys fixed per PIO round.
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[arg(long, value_enum, default_value = "noreversal")]
    pub mode: ModeArg,
    /// External solver command template with {model} and {solution}
    /// placeholders; the embedded solver is used when absent.
    #[arg(long)]
    pub solver_cmd: Option<String>,
    /// Solve time limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Drop the multi-block cross-aisle extension.
    #[arg(long)]
    pub no_multiblock: bool,
    /// Drop the odd-edge-count parity term.
    #[arg(long)]
    pub no_parity: bool,
    #[arg(long, value_enum, default_value = "strong")]
    pub symmetry: SymmetryArg,
    /// Drop the LP-strengthening inequalities.
    #[arg(long)]
    pub no_cuts: bool,
    /// Reference routed distance for the percentage deviation.
    #[arg(long)]
    pub reference: Option<f64>,
    /// Report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
    /// Also write per-trolley route walks (JSON) next to the report.
    #[arg(long)]
    pub routes_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct SolveMpsArgs {
    /// Free-format MPS model file.
    pub model: PathBuf,
    /// Solution file to write (`name value` lines).
    pub solution: PathBuf,
    /// Solve the LP relaxation instead of the MILP.
    #[arg(long)]
    pub relax: bool,
    #[arg(long)]
    pub time_limit: Option<f64>,
}

/// Error kinds aligned with the exit-code contract.
#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    SolverFailure(String),
    #[error("time limit reached without an incumbent")]
    Timeout,
    #[error("{0}")]
    OracleRefusal(String),
    #[error("{0}")]
    Io(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) | CmdError::Io(_) => 2,
            CmdError::SolverFailure(_) => 3,
            CmdError::Timeout => 4,
            CmdError::OracleRefusal(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CmdError::Validation(_) => "validation",
            CmdError::SolverFailure(_) => "solver",
            CmdError::Timeout => "timeout",
            CmdError::OracleRefusal(_) => "oracle_limit",
            CmdError::Io(_) => "io",
        }
    }

    pub fn to_stderr_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind(), "message": format!("{self}") } })
            .to_string()
    }
}

fn classify_solve(e: SolveError) -> CmdError {
    match e {
        SolveError::TimeoutNoIncumbent => CmdError::Timeout,
        other => CmdError::SolverFailure(other.to_string()),
    }
}

fn io_err(what: &str, e: impl Display) -> CmdError {
    CmdError::Io(format!("{what}: {e}"))
}

fn load_instance(path: &PathBuf) -> Result<Instance, CmdError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err("reading instance", e))?;
    parse_instance(&text).map_err(|e| match e {
        ParseError::Json(err) => CmdError::Validation(format!("malformed instance: {err}")),
        other => CmdError::Validation(other.to_string()),
    })
}

pub fn run(cli: Cli) -> Result<String, CmdError> {
    match cli.command {
        CommandKind::Batch(args) => cmd_batch(args),
        CommandKind::Oracle(args) => cmd_oracle(args),
        CommandKind::SolveMps(args) => cmd_solve_mps(args),
    }
}

fn model_config(args: &BatchArgs) -> ModelConfig {
    ModelConfig {
        multiblock: !args.no_multiblock,
        parity: !args.no_parity,
        symmetry: match args.symmetry {
            SymmetryArg::None => Symmetry::None,
            SymmetryArg::Basic => Symmetry::Basic,
            SymmetryArg::Strong => Symmetry::Strong,
        },
        valid_inequalities: !args.no_cuts,
        prune_dominated: true,
    }
}

fn make_solver(args: &BatchArgs) -> AnySolver {
    match &args.solver_cmd {
        Some(cmd) => {
            let mut config = BackendConfig::new(cmd);
            config.time_limit_secs = args.time_limit;
            AnySolver::Subprocess(SubprocessSolver::new(config))
        }
        None => AnySolver::Builtin(match args.time_limit {
            Some(secs) => BuiltinSolver::with_time_limit(Duration::from_secs_f64(secs)),
            None => BuiltinSolver::new(),
        }),
    }
}

pub fn cmd_batch(args: BatchArgs) -> Result<String, CmdError> {
    let instance = load_instance(&args.instance)?;
    let config = model_config(&args);
    let solver = make_solver(&args);
    let mode = args.mode.route_mode();

    let mut objective = None;
    let mut root_bound = None;
    let mut node_count = None;
    let mut build_time = 0.0;
    let solve_time;

    let batching = match args.method {
        Method::Exact => {
            let t0 = Instant::now();
            let (model, catalog) = approx::build(&instance, &config)
                .map_err(|e| CmdError::Validation(e.to_string()))?;
            build_time = t0.elapsed().as_secs_f64();
            let result = solver.solve(&model).map_err(classify_solve)?;
            solve_time = result.wall_time_secs;
            if !result.has_values() {
                return Err(CmdError::SolverFailure(format!(
                    "no solution (status {:?})",
                    result.status
                )));
            }
            objective = result.objective_value;
            node_count = result.node_count;
            let relax = solver.solve_relaxation(&model).map_err(classify_solve)?;
            root_bound = relax.objective_value;
            approx::audit_solution(&instance, &catalog, &result)
                .map_err(|e| CmdError::SolverFailure(format!("solution audit failed: {e}")))?;
            approx::extract_batching(&catalog, &result)
                .map_err(|e| CmdError::SolverFailure(e.to_string()))?
        }
        Method::Pio => {
            let pio = PioConfig {
                tau: args.tau.max(1),
                model: config,
            };
            let t0 = Instant::now();
            let out = heuristics::pio_batch(&instance, &pio, &solver)
                .map_err(|e| CmdError::SolverFailure(e.to_string()))?;
            solve_time = t0.elapsed().as_secs_f64();
            out
        }
        Method::Savings => {
            let t0 = Instant::now();
            let out = heuristics::savings_batch(
                &instance,
                mode,
                SavingsEstimator::ExactRoute,
                &config,
                &solver,
            )
            .map_err(|e| CmdError::SolverFailure(e.to_string()))?;
            solve_time = t0.elapsed().as_secs_f64();
            out
        }
    };

    batching
        .validate(&instance)
        .map_err(|e| CmdError::SolverFailure(format!("method produced invalid batching: {e}")))?;

    let t0 = Instant::now();
    let (routes, total) =
        router::route_batching(&instance, &batching, mode, &solver, DEFAULT_REVERSAL_CAP).map_err(
            |e| match e {
                router::RouteError::Solve(se) => classify_solve(se),
                other => CmdError::SolverFailure(other.to_string()),
            },
        )?;
    let route_time = t0.elapsed().as_secs_f64();

    if let Some(path) = &args.routes_out {
        let docs: Vec<_> = routes.iter().map(|(t, r)| route_to_doc(*t, r)).collect();
        let text = serde_json::to_string_pretty(&docs).map_err(|e| io_err("encoding routes", e))?;
        std::fs::write(path, text).map_err(|e| io_err("writing routes", e))?;
    }

    let report = RunReport {
        method: match args.method {
            Method::Exact => "exact".into(),
            Method::Pio => "pio".into(),
            Method::Savings => "savings".into(),
        },
        mode: args.mode.label().into(),
        config: ConfigEcho {
            multiblock: config.multiblock,
            parity: config.parity,
            symmetry: format!("{:?}", config.symmetry).to_lowercase(),
            valid_inequalities: config.valid_inequalities,
            prune_dominated: config.prune_dominated,
            tau: (args.method == Method::Pio).then_some(args.tau.max(1)),
            solver: args.solver_cmd.clone().unwrap_or_else(|| "builtin".into()),
            time_limit_secs: args.time_limit,
        },
        build_time_secs: build_time,
        solve_time_secs: solve_time,
        objective,
        root_relaxation_bound: root_bound,
        node_count,
        route_time_secs: route_time,
        routes: routes
            .iter()
            .map(|(t, r)| TrolleyRoute {
                trolley: *t,
                distance: r.distance,
            })
            .collect(),
        total_routed: total,
        total_routed_display: one_decimal(total),
        reference: args.reference,
        deviation_pct: deviation_pct(total, args.reference),
    };
    let rendered = match args.format {
        FormatArg::Json => report.to_json(),
        FormatArg::Csv => report.to_csv(),
    };
    write_out(&args.out, &rendered)?;
    Ok(rendered)
}

#[derive(Serialize, Debug)]
pub struct OracleReport {
    pub approx_optimum: f64,
    pub joint_noreversal: f64,
    pub joint_reversal: f64,
}

pub fn cmd_oracle(args: OracleArgs) -> Result<String, CmdError> {
    let instance = load_instance(&args.instance)?;
    let limits = OracleLimits::default();
    let config = ModelConfig::default();
    let refusal = |e: oracle::OracleError| CmdError::OracleRefusal(e.to_string());

    let batchings = oracle::enumerate_batchings(&instance, &limits).map_err(refusal)?;
    let mut approx_optimum = 0.0;
    if !instance.orders().is_empty() {
        approx_optimum = f64::INFINITY;
        for b in &batchings {
            let v =
                oracle::eval_approx_objective(&instance, b, &config, &limits).map_err(refusal)?;
            approx_optimum = approx_optimum.min(v);
        }
    }
    let (joint_nr, _) =
        oracle::joint_optimal(&instance, RouteMode::NoReversal, &limits).map_err(refusal)?;
    let (joint_rev, _) =
        oracle::joint_optimal(&instance, RouteMode::Reversal, &limits).map_err(refusal)?;

    let report = OracleReport {
        approx_optimum,
        joint_noreversal: joint_nr,
        joint_reversal: joint_rev,
    };
    let rendered = match args.format {
        FormatArg::Json => {
            serde_json::to_string_pretty(&report).map_err(|e| io_err("encoding report", e))?
        }
        FormatArg::Csv => format!(
            "approx_optimum,joint_noreversal,joint_reversal\n{},{},{}\n",
            report.approx_optimum, report.joint_noreversal, report.joint_reversal
        ),
    };
    write_out(&args.out, &rendered)?;
    Ok(rendered)
}

pub fn cmd_solve_mps(args: SolveMpsArgs) -> Result<String, CmdError> {
    let text = std::fs::read_to_string(&args.model).map_err(|e| io_err("reading model", e))?;
    let model = read_mps(&text).map_err(|e| CmdError::Validation(e.to_string()))?;
    let solver = match args.time_limit {
        Some(secs) => BuiltinSolver::with_time_limit(Duration::from_secs_f64(secs)),
        None => BuiltinSolver::new(),
    };
    let result = if args.relax {
        solver.solve_relaxation(&model)
    } else {
        solver.solve(&model)
    }
    .map_err(classify_solve)?;

    let mut out = String::new();
    match result.status {
        pickbatch_core::milp::SolveStatus::Infeasible => out.push_str("infeasible\n"),
        pickbatch_core::milp::SolveStatus::Unbounded => out.push_str("unbounded\n"),
        _ => {
            if let Some(obj) = result.objective_value {
                out.push_str(&format!("* objective {obj}\n"));
            }
            for (v, &x) in model.vars().iter().zip(&result.values) {
                out.push_str(&format!("{} {}\n", v.name, x));
            }
        }
    }
    std::fs::write(&args.solution, &out).map_err(|e| io_err("writing solution", e))?;
    Ok(out)
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), CmdError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| io_err("writing report", e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
