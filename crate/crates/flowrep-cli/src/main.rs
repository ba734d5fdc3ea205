//! `flowrep` — command-line front end for the flow-based reputation engine.
//!
//! User ids in every CLI interface are 1-based, matching the ratings-log
//! wire format. Outputs are JSON documents that echo the fully-resolved
//! configuration for provenance; experiment sweeps additionally emit tidy
//! CSV for plotting.
//!
//! Exit codes: 0 success, 2 validation/parse errors, 3 non-convergence,
//! 4 instance-violates-theorem (degenerate or out-of-class instances).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flowrep::error::Error;
use flowrep::sensitivity::{influence_matrix, rank_attack_channels};
use flowrep::simlab::{
    apply, gen_matrix, run_experiment, AttackKind, AttackSpec, ExperimentConfig, ExperimentKind,
    GeneratorConfig,
};
use flowrep::solver::{
    fixed_point_residual, solve, SolveMethod, SolverConfig, StartVector,
};
use flowrep::{baseline, check_irreducible, EvidenceMatrix, TransactionLog};

#[derive(Parser)]
#[command(
    name = "flowrep",
    about = "Flow-based reputation: aggregation, solving, sensitivity, attacks, experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a ratings log into an evidence matrix
    Aggregate(AggregateArgs),
    /// Solve the reputation equation for a matrix and start vector
    Solve(SolveArgs),
    /// Apply an attack and report the reputation change
    Attack(AttackArgs),
    /// Rank the attack channels an attacker should manipulate
    Sensitivity(SensitivityArgs),
    /// Run a seeded experiment sweep
    Experiment(ExperimentArgs),
    /// Generate a random marketplace evidence matrix
    Generate(GenerateArgs),
    /// EigenTrust-style baseline metric on a ratings log
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct AggregateArgs {
    /// Ratings log CSV (header: rater,ratee,rating,weight[,timestamp])
    #[arg(long)]
    log: PathBuf,
    /// Population size; defaults to the largest user id in the log
    #[arg(long)]
    users: Option<usize>,
    /// Output matrix CSV path
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Output matrix JSON path
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverFlags {
    /// Weight of indirect evidence, in [0,1]
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// 1-norm convergence threshold; defaults to n·1e-15
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    max_iterations: usize,
    /// iterative | direct
    #[arg(long, default_value = "iterative")]
    method: String,
}

impl SolverFlags {
    fn build(&self) -> Result<SolverConfig, Error> {
        let method = match self.method.as_str() {
            "iterative" => SolveMethod::Iterative,
            "direct" => SolveMethod::Direct,
            other => {
                return Err(Error::InvalidInstance(format!(
                    "unknown method {other:?} (expected iterative|direct)"
                )))
            }
        };
        let mut cfg = SolverConfig::new(self.alpha)?
            .with_max_iterations(self.max_iterations)?
            .with_method(method);
        if let Some(delta) = self.delta {
            cfg = cfg.with_delta(delta)?;
        }
        Ok(cfg)
    }

    fn echo(&self, n: usize) -> serde_json::Value {
        serde_json::json!({
            "alpha": self.alpha,
            "delta": self.delta.unwrap_or(n as f64 * 1e-15),
            "max_iterations": self.max_iterations,
            "method": self.method,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Evidence matrix path (.csv or .json)
    #[arg(long)]
    matrix: PathBuf,
    /// Start vector: `uniform:c`, `pretrusted:T`, or a path
    #[arg(long, default_value = "uniform:0.5")]
    s: String,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the result JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// self_promotion | slandering | sybil
    #[arg(long)]
    kind: String,
    /// Attacker user id (1-based)
    #[arg(long)]
    attacker: u32,
    /// Target user id (1-based); required for slandering and sybil
    #[arg(long)]
    target: Option<u32>,
    /// Sybil sibling ratio m (appends ⌊n·m⌋ accounts)
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    #[arg(long, default_value = "uniform:0.5")]
    s: String,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SensitivityArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Target user id (1-based)
    #[arg(long)]
    target: u32,
    /// Attacker user id (1-based)
    #[arg(long)]
    attacker: u32,
    /// How many channels to rank
    #[arg(short, long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value = "uniform:0.5")]
    s: String,
    #[command(flatten)]
    solver: SolverFlags,
    /// Dump the full influence matrix E as CSV
    #[arg(long)]
    dump_e: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// method_comparison | alpha_sweep | s_scalar_sweep | s_pretrusted_sweep |
    /// selfref_study | self_promotion_study | slandering_study | sybil_study
    #[arg(long)]
    kind: String,
    /// Trials per grid point (defaults to the study design)
    #[arg(long)]
    trials: Option<usize>,
    /// Override the population size of the study
    #[arg(long)]
    n: Option<usize>,
    /// Base seed; FLOWREP_SEED is used when omitted
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_csv: PathBuf,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.6)]
    tau_max: f64,
    #[arg(long, default_value_t = 0.3)]
    fill: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Output matrix CSV path
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    users: Option<usize>,
    /// Initial distribution: `uniform`, `pretrusted:T`, or a path
    #[arg(long, default_value = "uniform")]
    p: String,
    #[arg(long, default_value_t = 0.85)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-12)]
    delta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_thread_pool();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidInstance(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => 2,
        Error::NonConvergence { .. } | Error::SpectralFailure { .. } | Error::NumericalFailure(_) => 3,
        Error::TheoremViolation(_) | Error::DegenerateInstance(_) => 4,
    }
}

fn init_thread_pool() {
    if let Ok(threads) = std::env::var("FLOWREP_THREADS") {
        if let Ok(count) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build_global();
        }
    }
}

fn default_seed() -> u64 {
    std::env::var("FLOWREP_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Sensitivity(args) => cmd_sensitivity(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Baseline(args) => cmd_baseline(args),
    }
}

/// Parses the `uniform:c` / `pretrusted:T` / path mini-language.
fn parse_start_spec(spec: &str, n: usize) -> Result<StartVector, Error> {
    if let Some(c) = spec.strip_prefix("uniform:") {
        let c: f64 = c.parse().map_err(|e| {
            Error::InvalidInstance(format!("bad uniform start value {c:?}: {e}"))
        })?;
        return StartVector::uniform(n, c);
    }
    if let Some(t) = spec.strip_prefix("pretrusted:") {
        let t: usize = t.parse().map_err(|e| {
            Error::InvalidInstance(format!("bad pre-trusted count {t:?}: {e}"))
        })?;
        return StartVector::pretrusted(n, t);
    }
    let s = StartVector::from_str_auto(&std::fs::read_to_string(Path::new(spec))?)?;
    if s.len() != n {
        return Err(Error::InvalidInstance(format!(
            "start vector from {spec} has length {}, matrix needs {n}",
            s.len()
        )));
    }
    Ok(s)
}

fn user_index(id: u32, n: usize, what: &str) -> Result<usize, Error> {
    if id < 1 || id as usize > n {
        return Err(Error::InvalidInstance(format!(
            "{what} id {id} outside [1,{n}]"
        )));
    }
    Ok(id as usize - 1)
}

fn emit(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_aggregate(args: AggregateArgs) -> Result<(), Error> {
    let log = TransactionLog::read_path_auto(&args.log, args.users)?;
    let a = flowrep::aggregate(&log)?;
    let n = a.n();
    let interacted = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| x != y && a.get(x, y) != 0.5)
        .count();
    let report = check_irreducible(&a);
    if !report.irreducible {
        eprintln!(
            "warning: matrix is reducible; a violating component is {:?} (1-based)",
            report.component.iter().map(|&i| i + 1).collect::<Vec<_>>()
        );
    }
    if let Some(path) = &args.out_csv {
        a.write_csv(path)?;
    }
    if let Some(path) = &args.out_json {
        a.write_json(path)?;
    }
    println!(
        "{}",
        serde_json::json!({
            "config": { "log": args.log, "users": n },
            "n": n,
            "events": log.events().len(),
            "interacted_pairs": interacted,
            "fill_fraction": interacted as f64 / (n * n - n) as f64,
            "irreducible": report.irreducible,
        })
    );
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let a = EvidenceMatrix::read_path(&args.matrix)?;
    let s = parse_start_spec(&args.s, a.n())?;
    let cfg = args.solver.build()?;
    let result = solve(&a, &s, &cfg)?;
    let mut value = result.to_json_value();
    value["config"] = args.solver.echo(a.n());
    value["config"]["matrix"] = serde_json::json!(args.matrix);
    value["config"]["s"] = serde_json::json!(args.s);
    emit(&args.out, &value)
}

fn cmd_attack(args: AttackArgs) -> Result<(), Error> {
    let a = EvidenceMatrix::read_path(&args.matrix)?;
    let n = a.n();
    let s = parse_start_spec(&args.s, n)?;
    let cfg = args.solver.build()?;
    let kind = match args.kind.as_str() {
        "self_promotion" => AttackKind::SelfPromotion,
        "slandering" => AttackKind::Slandering,
        "sybil" => AttackKind::Sybil,
        other => {
            return Err(Error::InvalidInstance(format!(
                "unknown attack kind {other:?}"
            )))
        }
    };
    let attacker = user_index(args.attacker, n, "attacker")?;
    let target = args
        .target
        .map(|t| user_index(t, n, "target"))
        .transpose()?;
    let spec = AttackSpec {
        kind,
        attacker,
        target,
        sybil_ratio: args.m,
    };
    let before = solve(&a, &s, &cfg)?;
    let (attacked, s_after) = apply(&a, &s, &spec)?;
    let after = solve(&attacked, &s_after, &cfg)?;
    let delta_r: Vec<f64> = (0..n).map(|i| after.r[i] - before.r[i]).collect();
    let mut value = serde_json::json!({
        "config": {
            "matrix": args.matrix,
            "kind": args.kind,
            "attacker": args.attacker,
            "target": args.target,
            "m": args.m,
            "s": args.s,
            "solver": args.solver.echo(n),
        },
        "n_before": n,
        "n_after": attacked.n(),
        "before": before.to_json_value(),
        "after": after.to_json_value(),
        "delta_r": delta_r,
        "delta_attacker": after.r[attacker] - before.r[attacker],
        "delta_ell": after.ell - before.ell,
    });
    if let Some(t) = target {
        value["delta_target"] = serde_json::json!(after.r[t] - before.r[t]);
    }
    emit(&args.out, &value)
}

fn cmd_sensitivity(args: SensitivityArgs) -> Result<(), Error> {
    let a = EvidenceMatrix::read_path(&args.matrix)?;
    let n = a.n();
    let s = parse_start_spec(&args.s, n)?;
    let cfg = args.solver.build()?;
    let target = user_index(args.target, n, "target")?;
    let attacker = user_index(args.attacker, n, "attacker")?;
    let result = solve(&a, &s, &cfg)?;
    let influence = influence_matrix(&a, &result, cfg.alpha)?;
    if let Some(path) = &args.dump_e {
        std::fs::write(path, influence.to_csv_string())?;
    }
    let channels = rank_attack_channels(&influence, target, attacker, args.k)?;
    let channels: Vec<serde_json::Value> = channels
        .iter()
        .map(|ch| {
            serde_json::json!({
                "z": ch.z + 1,
                "sign": match ch.sign {
                    flowrep::sensitivity::PushDirection::Increase => "increase",
                    flowrep::sensitivity::PushDirection::Decrease => "decrease",
                },
                "magnitude": ch.magnitude,
            })
        })
        .collect();
    let value = serde_json::json!({
        "config": {
            "matrix": args.matrix,
            "target": args.target,
            "attacker": args.attacker,
            "k": args.k,
            "s": args.s,
            "solver": args.solver.echo(n),
        },
        "residual_check": fixed_point_residual(&a, &s, cfg.alpha, &result.r),
        "channels": channels,
    });
    emit(&args.out, &value)
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), Error> {
    let kind = ExperimentKind::parse(&args.kind)?;
    let mut cfg = ExperimentConfig::new(kind, args.seed.unwrap_or_else(default_seed));
    cfg.trials = args.trials;
    cfg.n = args.n;
    let report = run_experiment(&cfg)?;
    std::fs::write(&args.out_csv, report.to_csv_string())?;
    if let Some(path) = &args.out_json {
        std::fs::write(path, report.to_json_string()?)?;
    }
    println!(
        "{}",
        serde_json::json!({
            "experiment": report.experiment,
            "config": report.config,
            "points": report.points.len(),
            "failures": report.failures.len(),
            "wall_time_ms": report.wall_time_ms,
            "out_csv": args.out_csv,
        })
    );
    if !report.failures.is_empty() {
        for failure in &report.failures {
            eprintln!(
                "warning: trial failed: {} (seed {}): {}",
                failure.context, failure.seed, failure.error
            );
        }
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let cfg = GeneratorConfig {
        n: args.n,
        tau_max: args.tau_max,
        fill: args.fill,
        noise: args.noise,
        seed: args.seed.unwrap_or_else(default_seed),
    };
    let a = gen_matrix(&cfg)?;
    a.write_csv(&args.out)?;
    if let Some(path) = &args.out_json {
        a.write_json(path)?;
    }
    println!(
        "{}",
        serde_json::json!({ "config": cfg, "n": a.n(), "out": args.out })
    );
    Ok(())
}

fn parse_p_spec(spec: &str, n: usize) -> Result<Vec<f64>, Error> {
    match spec {
        "uniform" => Ok(vec![1.0 / n as f64; n]),
        _ => {
            if let Some(t) = spec.strip_prefix("pretrusted:") {
                let t: usize = t.parse().map_err(|e| {
                    Error::InvalidInstance(format!("bad pre-trusted count {t:?}: {e}"))
                })?;
                if t == 0 || t > n {
                    return Err(Error::InvalidInstance(format!(
                        "pre-trusted count {t} outside [1,{n}]"
                    )));
                }
                let mut p = vec![0.0; n];
                p[..t].fill(1.0 / t as f64);
                return Ok(p);
            }
            let text = std::fs::read_to_string(Path::new(spec))?;
            let p: Vec<f64> = serde_json::from_str(text.trim())?;
            if p.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "p from {spec} has length {}, log population is {n}",
                    p.len()
                )));
            }
            Ok(p)
        }
    }
}

fn cmd_baseline(args: BaselineArgs) -> Result<(), Error> {
    let log = TransactionLog::read_path_auto(&args.log, args.users)?;
    let trust = baseline::LocalTrustMatrix::from_log(&log);
    let n = trust.n();
    let p = parse_p_spec(&args.p, n)?;
    let r = baseline::eigentrust_solve(trust.normalized(), &p, args.alpha, args.delta)?;
    let normalized: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| trust.normalized()[(i, j)]).collect())
        .collect();
    let s_matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| trust.s_matrix()[(i, j)]).collect())
        .collect();
    let value = serde_json::json!({
        "config": {
            "log": args.log, "users": n, "p": args.p,
            "alpha": args.alpha, "delta": args.delta,
        },
        "s_matrix": s_matrix,
        "normalized": normalized,
        "r": r,
    });
    emit(&args.out, &value)
}
