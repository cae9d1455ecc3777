//! Command-line front end.
//!
//! `solve` runs one scheduler on a workload file, `compare` runs all three
//! and normalizes against the optimum, `generate` writes synthetic
//! workloads. Exit codes: 0 on success, 1 for bad input, 2 when a computed
//! schedule breaks an internal invariant.

pub mod files;
pub mod generate;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::general::{self, SolveReport};
use crate::heuristics::{schedule_heuristic, HeuristicKind};
use crate::model::{Machine, Workload};
use crate::packing::{pack, validate, Schedule};
use generate::RandomSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_internal() {
            CliError::Internal(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Opt,
    Ipc,
    Ltf,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Opt => "opt",
            Solver::Ipc => "ipc",
            Solver::Ltf => "ltf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Mix1,
    Mix5,
    Stress,
    Random,
}

#[derive(Debug, Parser)]
#[command(
    name = "hemc",
    version,
    about = "Makespan-optimal scheduling on big/small multicores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schedule a workload with one solver.
    Solve(SolveArgs),
    /// Run opt, ipc and ltf and print makespans normalized to the optimum.
    Compare(CompareArgs),
    /// Write a synthetic workload file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(short, long)]
    pub workload: PathBuf,
    #[arg(long, value_enum, default_value_t = Solver::Opt)]
    pub solver: Solver,
    /// Schedule JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Gantt chart destination.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Check the schedule against every structural rule.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(short, long)]
    pub workload: PathBuf,
    /// JSON destination; printed after the table when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub big: usize,
    #[arg(long, default_value_t = 4)]
    pub small: usize,
    /// Workload destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of processes (random preset).
    #[arg(long, default_value_t = RandomSpec::default().count)]
    pub count: usize,
    #[arg(long, default_value_t = RandomSpec::default().sf.0)]
    pub sf_min: f64,
    #[arg(long, default_value_t = RandomSpec::default().sf.1)]
    pub sf_max: f64,
    #[arg(long, default_value_t = RandomSpec::default().big_time.0)]
    pub time_min: f64,
    #[arg(long, default_value_t = RandomSpec::default().big_time.1)]
    pub time_max: f64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => 1,
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, stdout),
        Command::Compare(a) => cmd_compare(&a, stdout),
        Command::Generate(a) => cmd_generate(&a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Schedule plus the optimizer's report when there is one.
pub struct Solved {
    pub schedule: Schedule,
    pub report: Option<SolveReport>,
}

pub fn run_solver(w: &Workload, m: Machine, solver: Solver) -> Result<Solved, CliError> {
    Ok(match solver {
        Solver::Opt => {
            let report = general::solve(w, m)?;
            let schedule = pack(w, m, &report.assignment, report.t_f)?;
            Solved {
                schedule,
                report: Some(report),
            }
        }
        Solver::Ipc => Solved {
            schedule: schedule_heuristic(w, m, HeuristicKind::IpcDriven)?,
            report: None,
        },
        Solver::Ltf => Solved {
            schedule: schedule_heuristic(w, m, HeuristicKind::Ltf)?,
            report: None,
        },
    })
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    solver: Solver,
    makespan: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a SolveReport>,
}

pub fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (w, m) = files::read_workload(&a.workload)?;
    let solved = run_solver(&w, m, a.solver)?;
    if a.validate {
        let violations = validate(&solved.schedule, &w, m);
        if !violations.is_empty() {
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(CliError::Internal(format!(
                "schedule failed validation:\n{}",
                lines.join("\n")
            )));
        }
    }
    if let Some(out) = &a.out {
        files::write_file(out, &files::schedule_json(&solved.schedule))?;
    }
    if let Some(path) = &a.svg {
        files::write_file(path, &svg::render(&solved.schedule))?;
    }
    let summary = SolveSummary {
        solver: a.solver,
        makespan: solved.schedule.makespan,
        report: solved.report.as_ref(),
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    writeln!(stdout, "{text}").map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub solver: Solver,
    pub makespan: f64,
    pub normalized: f64,
}

/// Makespans of opt, ipc and ltf, in that order, solved concurrently.
pub fn compare(w: &Workload, m: Machine) -> Result<Vec<CompareRow>, CliError> {
    let solvers = [Solver::Opt, Solver::Ipc, Solver::Ltf];
    let makespans: Vec<Result<f64, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = solvers
            .iter()
            .map(|&s| scope.spawn(move || run_solver(w, m, s).map(|r| r.schedule.makespan)))
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or_else(|_| Err(CliError::Internal("solver panicked".into())))
            })
            .collect()
    });
    let makespans = makespans.into_iter().collect::<Result<Vec<f64>, _>>()?;
    let opt = makespans[0];
    Ok(solvers
        .iter()
        .zip(makespans)
        .map(|(&solver, makespan)| CompareRow {
            solver,
            makespan,
            normalized: makespan / opt,
        })
        .collect())
}

pub fn format_table(rows: &[CompareRow]) -> String {
    let mut out = format!("{:<8}{:>16}{:>12}\n", "solver", "makespan", "normalized");
    for r in rows {
        out.push_str(&format!(
            "{:<8}{:>16.4}{:>12.4}\n",
            r.solver.to_string(),
            r.makespan,
            r.normalized
        ));
    }
    out
}

pub fn cmd_compare(a: &CompareArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (w, m) = files::read_workload(&a.workload)?;
    let rows = compare(&w, m)?;
    let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
    let io = |e: std::io::Error| CliError::Input(e.to_string());
    write!(stdout, "{}", format_table(&rows)).map_err(io)?;
    match &a.out {
        Some(path) => files::write_file(path, &format!("{json}\n")),
        None => writeln!(stdout, "\n{json}").map_err(io),
    }
}

pub fn generate_workload(a: &GenerateArgs) -> Result<(Workload, Machine), CliError> {
    let m = Machine::new(a.big, a.small)?;
    let w = match a.preset {
        Preset::Mix1 => generate::mix1(a.seed),
        Preset::Mix5 => generate::mix5(a.seed),
        Preset::Stress => generate::stress(),
        Preset::Random => generate::random(
            a.seed,
            RandomSpec {
                count: a.count,
                sf: (a.sf_min, a.sf_max),
                big_time: (a.time_min, a.time_max),
            },
        )?,
    };
    Ok((w, m))
}

pub fn cmd_generate(a: &GenerateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (w, m) = generate_workload(a)?;
    let text = files::workload_json(&w, m);
    match &a.out {
        Some(path) => files::write_file(path, &text),
        None => write!(stdout, "{text}").map_err(|e| CliError::Input(e.to_string())),
    }
}
