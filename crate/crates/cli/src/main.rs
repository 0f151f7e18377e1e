//! `netclear`: solve, generate, validate and benchmark clearing problems.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use netclear::experiments::{
    cross_validate, default_validation_variants, error_rate_study, runtime_study, ErrorRateConfig, Execution,
    QuarantineEntry, RuntimeConfig, StudyError, StudyTable, ValidationFailure,
};
use netclear::generators::{generate_document, SystemParams};
use netclear::solvers::{
    oracle_enumerate, AlgorithmId, Direction, MethodKind, SolveOptions, SolverError, SolverReport, Variant,
};
use netclear::{FinancialSystem, SystemDocument};

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_QUARANTINE: u8 = 4;

#[derive(Parser)]
#[command(name = "netclear", version, about = "Clearing vectors for financial networks with debt and equity cross-holdings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a system file.
    Solve(SolveArgs),
    /// Simulate a random system and write it as JSON.
    Generate(GenerateArgs),
    /// Cross-check every solver against exhaustive enumeration on random systems.
    Validate(ValidateArgs),
    /// Enumerate all default sets of a small system.
    Oracle(OracleArgs),
    /// Run the Trial-and-Error error-rate study.
    BenchError(BenchArgs),
    /// Run the runtime comparison study.
    BenchRuntime(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// System JSON file.
    system: PathBuf,
    /// picard, elsinger, hybrid, trial-error, sandwich, modified-sandwich,
    /// oracle, or a table label such as DP, ITE, SH.
    #[arg(long, default_value = "picard")]
    algorithm: String,
    /// Inner method of trial-error and sandwich algorithms.
    #[arg(long, default_value = "picard")]
    method: MethodKind,
    #[arg(long, default_value = "decreasing")]
    direction: Direction,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Trial-and-Error lag; 3 for Picard, 2 for Elsinger and Hybrid by default.
    #[arg(long)]
    lag: Option<usize>,
    /// Lag of the Modified Sandwich stall test.
    #[arg(long, default_value_t = netclear::solvers::DEFAULT_SANDWICH_LAG)]
    sandwich_lag: usize,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    /// Baseline nominal debt.
    #[arg(long = "d")]
    d_base: f64,
    #[arg(long)]
    nu_d: f64,
    #[arg(long)]
    nu_s: f64,
    /// Weight of the complete structure against the ring.
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,5,8")]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    threads: ThreadArgs,
}

#[derive(Args)]
struct OracleArgs {
    system: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Study configuration JSON file.
    config: PathBuf,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    threads: ThreadArgs,
}

#[derive(Args)]
struct ThreadArgs {
    /// Worker threads; 1 runs sequentially. Overridden by NETCLEAR_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

impl ThreadArgs {
    fn execution(&self) -> Result<Execution, String> {
        let threads = match std::env::var("NETCLEAR_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("NETCLEAR_THREADS must be a nonnegative integer, got `{v}`"))?,
            ),
            _ => self.threads,
        };
        Ok(Execution::from_threads(threads))
    }
}

/// A failure that maps onto an exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<StudyError> for Failure {
    fn from(e: StudyError) -> Self {
        let code = match e {
            StudyError::InvalidConfig(_) => EXIT_INPUT,
            StudyError::Csv(_) | StudyError::Io(_) => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::Model(_) | SolverError::InvalidArgument(_) | SolverError::TooManyFirms(_) => EXIT_INPUT,
            SolverError::PreconditionViolated { .. }
            | SolverError::NoFixedPointFound
            | SolverError::MultipleFixedPoints { .. }
            | SolverError::NoCandidate { .. } => EXIT_NOT_CONVERGED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(&args),
        Command::Generate(args) => generate(&args),
        Command::Validate(args) => validate(&args),
        Command::Oracle(args) => oracle(&args),
        Command::BenchError(args) => bench_error(&args),
        Command::BenchRuntime(args) => bench_runtime(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("netclear: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<FinancialSystem, Failure> {
    let text = read_file(path)?;
    let doc = SystemDocument::from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    FinancialSystem::from_document(&doc).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match out {
        Some(p) => fs::write(p, text).map_err(|e| (p.display().to_string(), e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| ("stdout".to_string(), e)),
    };
    res.map_err(|(what, e)| Failure {
        code: EXIT_FAILURE,
        message: format!("{what}: {e}"),
    })
}

fn parse_variant(algorithm: &str, method: MethodKind, direction: Direction) -> Result<Variant, Failure> {
    let both = Direction::Both;
    let v = match algorithm.to_ascii_lowercase().as_str() {
        "picard" => Variant::new(AlgorithmId::Iterative(MethodKind::Picard), direction),
        "elsinger" => Variant::new(AlgorithmId::Iterative(MethodKind::Elsinger), direction),
        "hybrid" => Variant::new(AlgorithmId::Iterative(MethodKind::Hybrid), direction),
        "trial-error" | "trial-and-error" => Variant::new(AlgorithmId::TrialError(method), direction),
        "sandwich" => Variant::new(AlgorithmId::Sandwich(method), both),
        "modified-sandwich" => Variant::new(AlgorithmId::ModifiedSandwich(method), both),
        "oracle" => Variant::new(AlgorithmId::Oracle, Direction::NotApplicable),
        _ => Variant::from_label(algorithm).ok_or_else(|| Failure::input(format!("unknown algorithm `{algorithm}`")))?,
    };
    let directional = matches!(v.algorithm, AlgorithmId::Iterative(_) | AlgorithmId::TrialError(_));
    if directional && !matches!(v.direction, Direction::Increasing | Direction::Decreasing) {
        return Err(Failure::input(format!("{} needs --direction increasing or decreasing", v.algorithm.family_label())));
    }
    Ok(v)
}

fn solve(args: &SolveArgs) -> Result<u8, Failure> {
    if !(args.eps > 0.0) {
        return Err(Failure::input("--eps must be positive"));
    }
    let variant = parse_variant(&args.algorithm, args.method, args.direction)?;
    let f = load_system(&args.system)?;
    let opts = SolveOptions {
        eps: args.eps,
        lag: args.lag,
        sandwich_lag: args.sandwich_lag,
        ..SolveOptions::default()
    };
    let report = variant.run(&f, &opts)?;
    let text = if args.json {
        format!("{}\n", serde_json::to_string_pretty(&report_json(&f, &report)).expect("json"))
    } else if args.csv {
        report_csv(&f, &report)
    } else {
        report_text(&f, &report)
    };
    write_output(None, &text)?;
    if report.converged {
        Ok(EXIT_OK)
    } else {
        if let Some(d) = &report.diagnostic {
            eprintln!("netclear: {} did not converge: {d}", report.label());
        }
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn report_json(f: &FinancialSystem, report: &SolverReport) -> serde_json::Value {
    json!({
        "algorithm": report.label(),
        "direction": report.direction,
        "converged": report.converged,
        "r": report.solution.r,
        "s": report.solution.s,
        "default_set": f.default_set(&report.solution).members(),
        "iterations": report.iterations,
        "linear_solves": report.linear_solves,
        "phi_applications": report.phi_applications,
        "trials": report.trials,
        "wall_time": report.wall_time,
        "diagnostic": report.diagnostic,
    })
}

fn report_csv(f: &FinancialSystem, report: &SolverReport) -> String {
    let defaults = f.default_set(&report.solution);
    let mut out = String::from("firm,r,s,default\n");
    for i in 0..f.n() {
        out.push_str(&format!(
            "{i},{},{},{}\n",
            report.solution.r[i],
            report.solution.s[i],
            u8::from(defaults.contains(i))
        ));
    }
    out
}

fn report_text(f: &FinancialSystem, report: &SolverReport) -> String {
    let defaults = f.default_set(&report.solution).members();
    let mut out = format!(
        "algorithm      {} ({})\nconverged      {}\n",
        report.label(),
        report.direction,
        report.converged
    );
    out.push_str(&format!("r              {:?}\n", report.solution.r.as_slice()));
    out.push_str(&format!("s              {:?}\n", report.solution.s.as_slice()));
    out.push_str(&format!("default set    {defaults:?}\n"));
    out.push_str(&format!("iterations     {}\n", report.iterations));
    out.push_str(&format!("linear solves  {}\n", report.linear_solves));
    out.push_str(&format!("wall time      {:.6e} s\n", report.wall_time));
    if let Some(d) = &report.diagnostic {
        out.push_str(&format!("diagnostic     {d}\n"));
    }
    out
}

fn generate(args: &GenerateArgs) -> Result<u8, Failure> {
    let params = SystemParams {
        n: args.n,
        d_base: args.d_base,
        nu_d: args.nu_d,
        nu_s: args.nu_s,
        lambda: args.lambda,
        seed: args.seed,
    };
    let doc = generate_document(&params).map_err(|e| Failure::input(e.to_string()))?;
    let mut text = doc.to_json_pretty();
    text.push('\n');
    write_output(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn validate(args: &ValidateArgs) -> Result<u8, Failure> {
    let exec = args.threads.execution().map_err(Failure::input)?;
    let variants = default_validation_variants();
    match cross_validate(&args.n_list, args.count, args.seed, &variants, exec) {
        Ok(report) => {
            println!(
                "{} systems, {} with borderline firms: all variants agree with the oracle",
                report.systems, report.borderline_systems
            );
            println!("{:<8} {:>6} {:>9} {:>14}", "variant", "runs", "exempted", "max deviation");
            for v in &report.variants {
                println!("{:<8} {:>6} {:>9} {:>14.3e}", v.name, v.runs, v.exempted, v.max_deviation);
            }
            Ok(EXIT_OK)
        }
        Err(ValidationFailure::Study(e)) => Err(e.into()),
        Err(ValidationFailure::Disagreement { cases, .. }) => {
            for c in &cases {
                eprintln!("{c}");
            }
            Err(Failure {
                code: EXIT_FAILURE,
                message: format!("{} disagreement(s) with the oracle", cases.len()),
            })
        }
    }
}

fn oracle(args: &OracleArgs) -> Result<u8, Failure> {
    let f = load_system(&args.system)?;
    let out = oracle_enumerate(&f)?;
    let text = if args.json {
        let value = json!({
            "r": out.solution.r,
            "s": out.solution.s,
            "default_set": out.default_set.members(),
            "passing_sets": out.passing_sets.iter().map(|s| s.members()).collect::<Vec<_>>(),
            "borderline": out.borderline,
            "linear_solves": out.linear_solves,
            "wall_time": out.wall_time,
        });
        format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
    } else {
        format!(
            "r              {:?}\ns              {:?}\ndefault set    {:?}\nborderline     {:?}\npassing sets   {}\n",
            out.solution.r.as_slice(),
            out.solution.s.as_slice(),
            out.default_set.members(),
            out.borderline,
            out.passing_sets.len()
        )
    };
    write_output(None, &text)?;
    Ok(EXIT_OK)
}

fn finish_study(table: &StudyTable, quarantine: &[QuarantineEntry], out: Option<&Path>) -> Result<u8, Failure> {
    let csv = table.to_csv_string()?;
    write_output(out, &csv)?;
    if quarantine.is_empty() {
        return Ok(EXIT_OK);
    }
    for q in quarantine {
        let s = &q.setting;
        eprintln!(
            "quarantined: task {} (n={}, d={}, nu_d={}, nu_s={}, lambda={}, rep {}) {}: {}",
            q.task, s.n, s.d_base, s.nu_d, s.nu_s, s.lambda, q.repetition, q.algorithm, q.message
        );
    }
    eprintln!("netclear: {} run(s) quarantined", quarantine.len());
    Ok(EXIT_QUARANTINE)
}

fn bench_error(args: &BenchArgs) -> Result<u8, Failure> {
    let cfg = ErrorRateConfig::from_json(&read_file(&args.config)?)?;
    let exec = args.threads.execution().map_err(Failure::input)?;
    let outcome = error_rate_study(&cfg, exec)?;
    finish_study(&outcome.table(), &outcome.quarantine, args.out.as_deref())
}

fn bench_runtime(args: &BenchArgs) -> Result<u8, Failure> {
    let cfg = RuntimeConfig::from_json(&read_file(&args.config)?)?;
    let exec = args.threads.execution().map_err(Failure::input)?;
    let outcome = runtime_study(&cfg, exec)?;
    finish_study(&outcome.table(), &outcome.quarantine, args.out.as_deref())
}
