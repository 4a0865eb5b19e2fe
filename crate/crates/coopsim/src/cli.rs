//! The `coopsim` command line: `simulate`, `optimize`, `validate`, and
//! `metrics` over JSON scenario/problem files.
//!
//! Exit codes: 0 success, 1 validation failure (malformed or invalid
//! input), 2 runtime error, 3 bad arguments. Output files are written to a
//! temporary path and renamed, so a failing command never leaves partial
//! output behind. Log verbosity is controlled by `RUST_LOG` only.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use crate::payoff::{
    brute_force_optimize, ga_optimize, GaParams, PayoffError, ProblemFile, ResultReport,
};
use crate::sim::{self, EpochRecord, ScenarioFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "coopsim",
    version,
    about = "Simulate and optimize multi-robot team cooperation dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory.jsonl + metrics.csv.
    Simulate {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Override the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's epoch count (must be at least 1).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        epochs: Option<u64>,
        /// Directory receiving the output files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimize a standalone problem file and write the result JSON.
    Optimize {
        /// Problem JSON file.
        #[arg(long)]
        problem: PathBuf,
        /// Search method.
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Seed for the genetic algorithm.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the result JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a scenario or problem file; print OK or the violations.
    #[command(group = ArgGroup::new("target").required(true))]
    Validate {
        /// Scenario JSON file.
        #[arg(long, group = "target")]
        scenario: Option<PathBuf>,
        /// Problem JSON file.
        #[arg(long, group = "target")]
        problem: Option<PathBuf>,
    },
    /// Recompute metrics from an existing trajectory.
    Metrics {
        /// Trajectory JSONL file produced by `simulate`.
        #[arg(long)]
        trajectory: PathBuf,
        /// Output path for the metrics CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Ga,
}

/// A failed command, carrying the exit code it maps to.
enum Failure {
    /// Invalid input content: exit 1.
    Validation(String),
    /// The command itself failed: exit 2.
    Runtime(String),
    /// Bad arguments, such as a missing input file: exit 3.
    Usage(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Runtime(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Failure {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

/// Parse arguments, dispatch, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_default_env().try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate {
            scenario,
            seed,
            epochs,
            out,
        } => cmd_simulate(&scenario, seed, epochs, &out),
        Command::Optimize {
            problem,
            method,
            seed,
            out,
        } => cmd_optimize(&problem, method, seed, &out),
        Command::Validate { scenario, problem } => cmd_validate(scenario, problem),
        Command::Metrics { trajectory, out } => cmd_metrics(&trajectory, &out),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(Failure::Usage(format!(
            "input file `{}` not found",
            path.display()
        ))),
        Err(e) => Err(Failure::Runtime(format!(
            "cannot read `{}`: {e}",
            path.display()
        ))),
    }
}

fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, Failure> {
    // serde_json errors carry the line and column of the failure.
    serde_json::from_str(text)
        .map_err(|e| Failure::Validation(format!("`{}`: {e}", path.display())))
}

/// Write through a temporary file in the destination directory and rename
/// into place, so failures never leave partial output.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .map_err(|e| Failure::Runtime(format!("cannot persist `{}`: {e}", path.display())))?;
    Ok(())
}

fn cmd_simulate(
    scenario_path: &Path,
    seed: Option<u64>,
    epochs: Option<u64>,
    out: &Path,
) -> Result<(), Failure> {
    let text = read_input(scenario_path)?;
    let mut file: ScenarioFile = parse_json(&text, scenario_path)?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    if let Some(epochs) = epochs {
        file.epochs = epochs;
    }

    let issues = file.validate();
    if !issues.is_empty() {
        return Err(Failure::Validation(format!(
            "invalid scenario `{}`:\n  {}",
            scenario_path.display(),
            issues.join("\n  ")
        )));
    }
    let scenario = file
        .build()
        .map_err(|e| Failure::Validation(e.to_string()))?;

    log::info!(
        "running scenario `{}`: {} robots, {} epochs, seed {}",
        scenario_path.display(),
        scenario.robots().len(),
        scenario.epochs(),
        scenario.seed()
    );
    let trajectory = sim::run(&scenario).map_err(|e| Failure::Runtime(e.to_string()))?;
    let summary = sim::metrics(&trajectory).map_err(|e| Failure::Runtime(e.to_string()))?;

    let mut jsonl = String::new();
    for record in &trajectory {
        jsonl.push_str(
            &serde_json::to_string(record)
                .map_err(|e| Failure::Runtime(format!("serialize record: {e}")))?,
        );
        jsonl.push('\n');
    }
    let trajectory_path = out.join("trajectory.jsonl");
    let metrics_path = out.join("metrics.csv");
    write_atomic(&trajectory_path, &jsonl)?;
    write_atomic(&metrics_path, &summary.to_csv())?;

    println!(
        "wrote {} and {}; {summary}",
        trajectory_path.display(),
        metrics_path.display()
    );
    Ok(())
}

fn cmd_optimize(
    problem_path: &Path,
    method: MethodArg,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let text = read_input(problem_path)?;
    let file: ProblemFile = parse_json(&text, problem_path)?;
    let issues = file.validate();
    if !issues.is_empty() {
        return Err(Failure::Validation(format!(
            "invalid problem `{}`:\n  {}",
            problem_path.display(),
            issues.join("\n  ")
        )));
    }
    let (model, mode) = file
        .build()
        .map_err(|e| Failure::Validation(e.to_string()))?;

    let report: ResultReport = match method {
        MethodArg::Brute => {
            let result =
                brute_force_optimize(&model, mode).map_err(|e| Failure::Runtime(e.to_string()))?;
            println!(
                "optimum team_payoff={} evaluations={}",
                result.team_payoff, result.evaluations
            );
            result.report(model.alphabet())
        }
        MethodArg::Ga => {
            let result = ga_optimize(&model, mode, &GaParams::default(), seed)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            match brute_force_optimize(&model, mode) {
                Ok(brute) => println!(
                    "best team_payoff={} evaluations={} gap={} (brute optimum {})",
                    result.team_payoff,
                    result.evaluations,
                    brute.team_payoff - result.team_payoff,
                    brute.team_payoff
                ),
                Err(PayoffError::TooLarge { .. }) => println!(
                    "best team_payoff={} evaluations={} gap=unavailable \
                     (search space exceeds the brute-force cap)",
                    result.team_payoff, result.evaluations
                ),
                Err(e) => return Err(Failure::Runtime(e.to_string())),
            }
            result.report(model.alphabet())
        }
    };

    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Runtime(format!("serialize result: {e}")))?;
    write_atomic(out, &json)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_validate(scenario: Option<PathBuf>, problem: Option<PathBuf>) -> Result<(), Failure> {
    let issues = if let Some(path) = scenario {
        let text = read_input(&path)?;
        let file: ScenarioFile = parse_json(&text, &path)?;
        file.validate()
    } else {
        let path = problem.expect("clap enforces exactly one target");
        let text = read_input(&path)?;
        let file: ProblemFile = parse_json(&text, &path)?;
        file.validate()
    };

    if issues.is_empty() {
        println!("OK");
        Ok(())
    } else {
        for issue in &issues {
            println!("violation: {issue}");
        }
        Err(Failure::Validation(format!(
            "{} violation(s) found",
            issues.len()
        )))
    }
}

fn cmd_metrics(trajectory_path: &Path, out: &Path) -> Result<(), Failure> {
    let text = read_input(trajectory_path)?;
    let mut records: Vec<EpochRecord> = Vec::new();
    for (number, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: EpochRecord = serde_json::from_str(line).map_err(|e| {
            Failure::Validation(format!(
                "`{}` line {}: {e}",
                trajectory_path.display(),
                number + 1
            ))
        })?;
        records.push(record);
    }
    let summary = sim::metrics(&records).map_err(|e| Failure::Validation(e.to_string()))?;
    write_atomic(out, &summary.to_csv())?;
    println!("wrote {}; {summary}", out.display());
    Ok(())
}
