//! The `secgame` command line.
//!
//! Exit codes: 0 success, 2 unreadable or invalid input, 3 solver failure,
//! 4 verification failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, SolveError};
use crate::model::{validate_spec, Equilibrium, GameSpec};
use crate::oracle::{epsilon_nash_check_with, uniqueness_probe, UniquenessProbe, VerificationReport, EPS_REL};
use crate::product::DualPair;
use crate::regions::{classify_target, lambda_grid, region_boundaries};
use crate::solve::{solve_detailed, Solution};
use crate::sweep::SweepRequest;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "secgame",
    version,
    about = "Nash equilibria of attacker-defender security games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a game and report the equilibrium as JSON.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        /// Write the JSON report here; a summary then goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Members of a boundary family to enumerate.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Check an equilibrium against best responses and structural invariants.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        /// A solve report or a bare equilibrium.
        #[arg(long)]
        eq: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative tolerance on best-response gains.
        #[arg(long, default_value_t = EPS_REL)]
        tol: f64,
        /// Random-start best-response dynamics to run as well.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
    },
    /// Solve along a budget grid and write CSV.
    Sweep {
        #[arg(long)]
        request: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Region boundary table of one target as CSV (product form).
    Regions {
        #[arg(long)]
        spec: PathBuf,
        /// Target index, from 1.
        #[arg(long, default_value_t = 1)]
        target: usize,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[arg(long, default_value_t = 21)]
        steps: usize,
        /// Also label the target's region at this (λ, ρ), e.g. `0.2,0.1`.
        #[arg(long, value_parser = parse_pair)]
        at: Option<(f64, f64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub seed: u64,
    #[serde(flatten)]
    pub solution: Solution,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub failures: Vec<String>,
    #[serde(flatten)]
    pub report: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessProbe>,
}

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

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::Model(ModelError::InvalidSpec(_)) => EXIT_INPUT,
            _ => EXIT_SOLVER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("cannot parse {what} {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<GameSpec, Failure> {
    let spec: GameSpec = read_json(path, "spec")?;
    let violations = validate_spec(&spec);
    if violations.is_empty() {
        Ok(spec)
    } else {
        let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        Err(Failure::input(format!(
            "invalid game specification:\n{}",
            lines.join("\n")
        )))
    }
}

/// Accepts a bare equilibrium or any object holding one under `equilibrium`.
fn load_equilibrium(path: &Path) -> Result<Equilibrium, Failure> {
    let value: serde_json::Value = read_json(path, "equilibrium")?;
    let inner = value.get("equilibrium").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .map_err(|e| Failure::input(format!("cannot parse equilibrium {}: {e}", path.display())))
}

/// JSON to `out` with the summary on stdout, or JSON to stdout with the
/// summary on stderr.
fn emit(json: &str, summary: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => {
            fs::write(p, format!("{json}\n"))
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
            print!("{summary}");
        }
        None => {
            println!("{json}");
            eprint!("{summary}");
        }
    }
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{z:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

fn summary(sol: &Solution) -> String {
    let eq = &sol.equilibrium;
    let mut s = format!(
        "model {:?}, budget domain {}\nx* = {}\ny* = {}\nλ = {:.6}, ρ = {:.6}, K_A = {}, K_D = {}\nU_A = {:.6}, U_D = {:.6}\n",
        sol.model,
        sol.domain,
        fmt_vec(&eq.alloc.x),
        fmt_vec(&eq.alloc.y),
        eq.lambda,
        eq.rho,
        eq.k_attacker,
        eq.k_defender,
        eq.utility_attacker,
        eq.utility_defender
    );
    if let Some(c) = &sol.linear_case {
        s += &format!("closed-form case {} ({:?}, k = {})\n", c.case, c.kind, c.k);
        if let Some((lo, hi)) = c.free_interval {
            s += &format!("equilibria form a family; free parameter in [{lo:.6}, {hi:.6}]\n");
        }
    }
    s
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn cmd_solve(spec: &Path, out: Option<&Path>, seed: u64, samples: usize) -> Result<(), Failure> {
    let spec = load_spec(spec)?;
    let solution = solve_detailed(&spec, samples)?;
    let text = summary(&solution);
    emit(&to_json(&SolveReport { seed, solution }), &text, out)
}

fn cmd_verify(spec: &Path, eq: &Path, out: Option<&Path>, seed: u64, tol: f64, restarts: usize) -> Result<(), Failure> {
    let spec = load_spec(spec)?;
    let eq = load_equilibrium(eq)?;
    let report = epsilon_nash_check_with(&spec, &eq, tol).map_err(|e| Failure {
        code: EXIT_VERIFY,
        message: e.to_string(),
    })?;
    let uniqueness = if restarts > 0 {
        Some(uniqueness_probe(&spec, restarts, seed, 2000, 1e-9)?)
    } else {
        None
    };
    let failures: Vec<String> = report.failures().iter().map(|s| s.to_string()).collect();
    let passed = failures.is_empty();
    let mut text = format!(
        "best-response gains: attacker {:.3e}, defender {:.3e}; KKT residual {:.3e}\n",
        report.eps_attacker, report.eps_defender, report.kkt_max_residual
    );
    for r in &report.invariant_results {
        text += &format!(
            "{:<16} {}  {}\n",
            r.name,
            if r.passed { "pass" } else { "FAIL" },
            r.detail
        );
    }
    if let Some(u) = &uniqueness {
        text += &format!(
            "dynamics from {} starts: converged {}, spread {:.3e}\n",
            u.endpoints.len(),
            u.all_converged,
            u.spread
        );
    }
    let json = to_json(&VerifyReport {
        seed,
        passed,
        failures: failures.clone(),
        report,
        uniqueness,
    });
    emit(&json, &text, out)?;
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("verification failed: {}", failures.join(", ")),
        })
    }
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => {
            Box::new(fs::File::create(p).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_sweep(request: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let req: SweepRequest = read_json(request, "sweep request")?;
    let problems = req.problems();
    if !problems.is_empty() {
        return Err(Failure::input(format!(
            "invalid sweep request: {}",
            problems.join("; ")
        )));
    }
    req.write_csv(writer(out)?)
        .map_err(|e| Failure::input(format!("cannot write CSV: {e}")))
}

fn cmd_regions(
    spec: &Path,
    target: usize,
    lambda_max: Option<f64>,
    steps: usize,
    at: Option<(f64, f64)>,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let spec = load_spec(spec)?;
    if target == 0 || target > spec.n {
        return Err(Failure::input(format!("target {target} outside 1..={}", spec.n)));
    }
    let i = target - 1;
    let probe = region_boundaries(i, &spec, &[0.0])?;
    let lambda_max = lambda_max.unwrap_or_else(|| (1.25 * probe[0].r1_threshold).max(1.0));
    let rows = region_boundaries(i, &spec, &lambda_grid(lambda_max, steps))?;
    if let Some((l, r)) = at {
        let label = classify_target(i, DualPair::new(l, r), &spec)?;
        eprintln!("target {target} at (λ, ρ) = ({l}, {r}): {label:?}");
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer(out)?);
    let csv_err = |e: csv::Error| Failure::input(format!("cannot write CSV: {e}"));
    w.write_record(["lambda", "r1_threshold", "r2_rho_boundary"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.r1_threshold.to_string(),
            r.r2_rho_boundary.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Failure::input(format!("cannot write CSV: {e}")))
}

pub fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Solve {
            spec,
            out,
            seed,
            samples,
        } => cmd_solve(&spec, out.as_deref(), seed, samples),
        Command::Verify {
            spec,
            eq,
            out,
            seed,
            tol,
            restarts,
        } => cmd_verify(&spec, &eq, out.as_deref(), seed, tol, restarts),
        Command::Sweep { request, out } => cmd_sweep(&request, out.as_deref()),
        Command::Regions {
            spec,
            target,
            lambda_max,
            steps,
            at,
            out,
        } => cmd_regions(&spec, target, lambda_max, steps, at, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
