//! `qcalc`: verification campaigns, tightness search, and operator
//! evaluation for Opial-type inequalities on q-geometric lattices.
//!
//! Exit status: 0 when every verified instance holds, 1 when any instance
//! fails, 2 on configuration or usage errors.

mod campaign;
mod eval;
mod records;
mod search_cmd;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use campaign::{render_report, summary_table, Campaign};
use eval::{run_eval, EvalInputs};
use search_cmd::{run_search, validate_search};

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

#[derive(Parser)]
#[command(
    name = "qcalc",
    version,
    about = "q-calculus operators and Opial-type inequality verification on geometric lattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded verification campaign over a (q, n, exponent) grid.
    Verify(VerifyArgs),
    /// Search for inequality-tightness extremizers by random-restart hill
    /// climbing.
    Search(SearchArgs),
    /// Evaluate one operator (q-natural, q-derivative, restricted-integral,
    /// jackson-ab) on a built-in function.
    Eval(EvalArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Inequality: opial-general, opial-p1, two-function, young-pair,
    /// wirtinger, or holder-step.
    inequality: String,
    /// Lattice bases, comma separated, each strictly between 0 and 1.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    q: Vec<String>,
    /// Subinterval counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,
    /// Right endpoint of the lattice.
    #[arg(long, default_value = "1")]
    b: String,
    /// Exponent grid for opial-general / holder-step.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<String>>,
    /// First Young exponent grid (young-pair).
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<String>>,
    /// Second Young exponent grid (young-pair).
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<String>>,
    /// Wirtinger exponent grid.
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<String>>,
    /// Instances per grid cell.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Master seed; all instance seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// float, exact, or both.
    #[arg(long, default_value = "float")]
    backend: String,
    /// Verdict tolerance override (relative to max(|lhs|, |rhs|, 1)).
    #[arg(long)]
    tol: Option<String>,
    /// Report file path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Skip hypothesis checks before evaluating.
    #[arg(long)]
    unchecked: bool,
    /// Generate functions violating one hypothesis (boundary or
    /// monotonicity) to demonstrate its necessity; requires --unchecked.
    #[arg(long, requires = "unchecked")]
    violate: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    /// Inequality to search (same names as verify).
    inequality: String,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    q: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,
    #[arg(long, default_value = "1")]
    b: String,
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    r: Option<Vec<String>>,
    /// Total verifier evaluations across the grid.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search reports are JSON only.
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Operator: q-natural, q-derivative, restricted-integral, jackson-ab.
    operator: String,
    /// Function: a polynomial like "1 + 2x - 1/2x^2" (degree <= 4) or "b-x".
    #[arg(long = "fn")]
    function: Option<String>,
    #[arg(long, default_value = "0.5")]
    q: String,
    /// Subinterval count (lattice operators) or q-natural order.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Right endpoint (lattice operators) / upper bound (jackson-ab).
    #[arg(long, default_value = "1")]
    b: String,
    /// Lower bound for jackson-ab.
    #[arg(long)]
    a: Option<String>,
    /// Lattice index for q-derivative.
    #[arg(long, default_value_t = 0)]
    j: usize,
    /// float or exact.
    #[arg(long, default_value = "float")]
    backend: String,
    /// Truncation tolerance for jackson-ab.
    #[arg(long, default_value = "1e-14")]
    rel_tol: String,
    /// Term cap for jackson-ab.
    #[arg(long, default_value_t = 100_000)]
    max_terms: usize,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode, CliError> {
    match Cli::parse().command {
        Command::Verify(args) => run_verify(args),
        Command::Search(args) => run_search_command(args),
        Command::Eval(args) => run_eval_command(args),
    }
}

fn write_or_print(out: &Option<PathBuf>, rendered: &str, side_info: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, rendered)
                .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
            print!("{side_info}");
        }
        None => {
            print!("{rendered}");
            eprint!("{side_info}");
        }
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    if !matches!(args.format.as_str(), "json" | "csv") {
        return Err(CliError::Config(format!(
            "unknown format {:?}; expected json or csv",
            args.format
        )));
    }
    let campaign = Campaign::validate(
        &args.inequality,
        args.q,
        args.n,
        args.b,
        args.p,
        args.s,
        args.t,
        args.r,
        args.trials,
        args.seed,
        &args.backend,
        args.tol,
        args.unchecked,
        args.violate,
    )?;
    let outcome = campaign.run()?;
    let rendered = render_report(&campaign.echo, &outcome, &args.format)?;
    write_or_print(&args.out, &rendered, &summary_table(&outcome.summary))?;

    if outcome.summary.failures > 0 {
        for record in outcome.records.iter().filter(|r| !r.holds).take(5) {
            eprintln!(
                "FAILED: {} q={} n={} seed={} backend={} lhs={} rhs={} margin={}",
                record.inequality_id,
                record.q,
                record.n,
                record.seed,
                record.backend,
                record.lhs,
                record.rhs,
                record.margin
            );
        }
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn run_search_command(args: SearchArgs) -> Result<ExitCode, CliError> {
    let run = validate_search(
        &args.inequality,
        args.q,
        args.n,
        args.b,
        args.p,
        args.s,
        args.t,
        args.r,
        args.budget,
        args.seed,
        &args.format,
    )?;
    let (result, rendered) = run_search(&run)?;
    let info = format!(
        "best ratio {} in cell {} after {} evaluations\n",
        result.best_ratio, result.best_cell, result.evaluations
    );
    write_or_print(&args.out, &rendered, &info)?;
    Ok(ExitCode::SUCCESS)
}

fn run_eval_command(args: EvalArgs) -> Result<ExitCode, CliError> {
    let inputs = EvalInputs {
        function: args.function.as_deref(),
        q: &args.q,
        b: &args.b,
        n: args.n,
        j: args.j,
        lower: args.a.as_deref(),
        rel_tol: &args.rel_tol,
        max_terms: args.max_terms,
    };
    let value = match args.backend.as_str() {
        "float" => run_eval::<f64>(&args.operator, &inputs)?,
        "exact" => run_eval::<num_rational::BigRational>(&args.operator, &inputs)?,
        other => {
            return Err(CliError::Config(format!(
                "unknown backend {other:?}; eval supports float or exact"
            )))
        }
    };
    println!("{value}");
    Ok(ExitCode::SUCCESS)
}
