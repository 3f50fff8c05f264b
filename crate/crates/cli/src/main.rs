//! Command-line front end: runs the verification suites on seeded or
//! file-supplied inputs and emits a schema-1 JSON report.
//!
//! Exit codes: 0 all checks pass, 1 some check failed, 2 precondition
//! violated, 3 I/O failure, 64 usage.

mod io;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub enum Failure {
    Usage(String),
    Precondition(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Precondition(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Precondition(m) | Failure::Io(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "sgmodel", about = "Operator-model verification suites")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cogenerator/semigroup roundtrip and the semigroup law.
    Roundtrip(SuiteArgs),
    /// Symbol recovery on scalar model spaces and symbol repair.
    Commutant(SuiteArgs),
    /// Discrete measure models of commuting normal tuples.
    Normal(SuiteArgs),
    /// Joint Wold splitting over every shift/unitary pattern.
    Wold(SuiteArgs),
    /// Minimal isometric dilation of a doubly commuting pure tuple.
    Dilate(SuiteArgs),
    /// Tensor splitting dichotomy for joint *-invariant subspaces.
    #[command(name = "tensor-q")]
    TensorQ(SuiteArgs),
    /// All suites back to back.
    #[command(name = "verify-all")]
    VerifyAll(SuiteArgs),
}

#[derive(Args)]
struct SuiteArgs {
    /// Base space dimension for generated inputs.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Number of tuple entries (legs) where the suite is multivariate.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Degree truncation of the Hardy spaces.
    #[arg(long, default_value_t = 32)]
    trunc: usize,
    /// Margin degrees reserved for asymptotic checks.
    #[arg(long, default_value_t = 8)]
    margin: usize,
    /// Pass tolerance for residual checks.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for every generated input.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated semigroup time grid.
    #[arg(long, default_value = "0.1,0.5,1,2")]
    times: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with one matrix or an array of matrices as input.
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

fn parse_times(text: &str) -> Result<Vec<f64>, Failure> {
    let mut times = Vec::new();
    for piece in text.split(',') {
        let piece = piece.trim();
        let t: f64 = piece
            .parse()
            .map_err(|_| Failure::Usage(format!("cannot parse time '{piece}'")))?;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::Usage(format!(
                "time {t} must be nonnegative and finite"
            )));
        }
        times.push(t);
    }
    if times.is_empty() {
        return Err(Failure::Usage("the time grid is empty".into()));
    }
    Ok(times)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let (name, args, suite): (_, _, fn(&suites::Options) -> Result<_, Failure>) = match &cli.cmd {
        Cmd::Roundtrip(a) => ("roundtrip", a, suites::roundtrip),
        Cmd::Commutant(a) => ("commutant", a, suites::commutant),
        Cmd::Normal(a) => ("normal", a, suites::normal),
        Cmd::Wold(a) => ("wold", a, suites::wold),
        Cmd::Dilate(a) => ("dilate", a, suites::dilate),
        Cmd::TensorQ(a) => ("tensor-q", a, suites::tensor_q),
        Cmd::VerifyAll(a) => ("verify-all", a, suites::verify_all),
    };
    let times = parse_times(&args.times)?;
    if args.dim == 0 || args.n == 0 || args.trunc < 2 || args.margin == 0 {
        return Err(Failure::Usage(
            "--dim, --n, --margin must be positive and --trunc at least 2".into(),
        ));
    }
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::Usage("--tol must be positive and finite".into()));
    }
    let inputs = match &args.input {
        Some(path) => Some(io::read_matrices(path)?),
        None => None,
    };
    let options = suites::Options {
        dim: args.dim,
        n: args.n,
        trunc: args.trunc,
        margin: args.margin,
        tol: args.tol,
        seed: args.seed,
        times,
        inputs,
    };
    let checks = suite(&options)?;
    let report = report::Report::assemble(
        name,
        options.seed,
        options.trunc,
        options.margin,
        options.tol,
        &options.times,
        checks,
    );
    let mut body = serde_json::to_string_pretty(&report)
        .map_err(|e| Failure::Io(format!("report serialization: {e}")))?;
    body.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        None => print!("{body}"),
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(64);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
