//! Batch front-end behind the `qpt` binary.
//!
//! Every subcommand writes `report.json`, `samples.csv` and one `.dat` file
//! per sampled series into the output directory. A series row pairs the
//! direct oracle value at `t` with the value predicted by the symbolic or
//! fitted result.

mod commands;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::{BigRational, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::qpoly::{rational_to_string, FitSearch};

#[derive(Parser, Debug)]
#[command(name = "qpt", version, about = "Quasi-polynomial toolkit: fits, normal forms, generating functions and Presburger families")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Sample window `T0 T1`; the trailing third is held out.
    #[arg(long, num_args = 2, value_names = ["T0", "T1"], global = true)]
    pub window: Option<Vec<u64>>,
    #[arg(long, default_value_t = 60, global = true)]
    pub max_period: u64,
    #[arg(long, default_value_t = 6, global = true)]
    pub max_degree: usize,
    /// Range `[0, B]` for quantifiers without a derivable bound.
    #[arg(long, default_value_t = 200, global = true)]
    pub quant_bound: u64,
    #[arg(long, short, default_value = "qpt-out", global = true)]
    pub out: PathBuf,
    /// Worker threads; `QPT_THREADS` takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quasi-polynomial arithmetic, division, gcd and floor.
    Qpoly {
        op: QpolyOp,
        /// Polynomial strings or quasi-polynomial JSON.
        operands: Vec<String>,
    },
    /// Smith normal form of a quasi-polynomial matrix.
    Snf(MatrixArgs),
    /// Hermite normal form of a quasi-polynomial matrix.
    Hnf(MatrixArgs),
    /// Fit of `t ↦ |P_t ∩ Z^d|` with a Brion cross-check.
    Ehrhart(PolyArgs),
    /// Per-class fit of the integer-hull vertices.
    Hull(PolyArgs),
    /// Parametric Frobenius number of polynomial generators.
    Frobenius { generators: Vec<String> },
    /// Parametric Presburger families.
    Presburger {
        #[command(subcommand)]
        action: PresburgerCmd,
    },
    /// Generating-function utilities.
    Gf(GfArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum QpolyOp {
    Add,
    Sub,
    Mul,
    /// Numeric division with `0 ≤ r < |g|`.
    Divmod,
    /// Degree division.
    Divdeg,
    Gcd,
    Floor,
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    /// JSON or `a, b; c, d` matrix file.
    #[arg(long, conflicts_with = "matrix")]
    pub input: Option<PathBuf>,
    /// Inline matrix, e.g. `"t, 0; 0, t+1"`.
    #[arg(long)]
    pub matrix: Option<String>,
}

#[derive(Args, Debug)]
pub struct PolyArgs {
    /// Polyhedron text, one inequality per line.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum PresburgerCmd {
    Check(CheckArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PropertyArg {
    #[value(name = "1")]
    P1,
    #[value(name = "2")]
    P2,
    #[value(name = "3")]
    P3,
    #[value(name = "3a")]
    P3a,
    #[value(name = "3b")]
    P3b,
    #[value(name = "4")]
    P4,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub property: PropertyArg,
    /// Formula file.
    #[arg(long)]
    pub input: PathBuf,
    /// Generating-function JSON to verify (property 4).
    #[arg(long)]
    pub candidate: Option<PathBuf>,
    /// Objective `c` for property 3a, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub objective: Option<Vec<i64>>,
    /// Number of distinct witnesses for property 3b.
    #[arg(long)]
    pub k: Option<usize>,
    /// Default enumeration box `[0, b]^d` when containment is not certified.
    #[arg(long, default_value_t = crate::presburger::props::DEFAULT_BOX_BOUND)]
    pub box_bound: i64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GfOp {
    Expand,
    Specialize,
    Normalize,
}

#[derive(Args, Debug)]
pub struct GfArgs {
    pub op: GfOp,
    /// Generating-function JSON, one class or `{period, classes}`.
    #[arg(long)]
    pub input: PathBuf,
    /// Box `lo,hi;lo,hi;…`.
    #[arg(long = "box")]
    pub bx: Option<String>,
    /// A single `t` instead of the window.
    #[arg(long)]
    pub t: Option<u64>,
}

/// Validated run parameters.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub window: (u64, u64),
    pub max_period: u64,
    pub max_degree: usize,
    pub quant_bound: u64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub const DEFAULT_WINDOW: (u64, u64) = (1, 60);

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig, Error> {
        let (subcommand, inputs) = match &cli.command {
            Command::Qpoly { op, operands } => (format!("qpoly {}", value_name(op)), operands.clone()),
            Command::Snf(m) | Command::Hnf(m) => {
                let name = if matches!(cli.command, Command::Snf(_)) { "snf" } else { "hnf" };
                let inputs = match (&m.input, &m.matrix) {
                    (Some(p), _) => vec![p.display().to_string()],
                    (None, Some(s)) => vec![s.clone()],
                    (None, None) => return Err(Error::Invalid("give --input or --matrix".into())),
                };
                (name.to_string(), inputs)
            }
            Command::Ehrhart(p) => ("ehrhart".into(), vec![p.input.display().to_string()]),
            Command::Hull(p) => ("hull".into(), vec![p.input.display().to_string()]),
            Command::Frobenius { generators } => ("frobenius".into(), generators.clone()),
            Command::Presburger { action: PresburgerCmd::Check(c) } => {
                let mut inputs = vec![c.input.display().to_string()];
                inputs.extend(c.candidate.iter().map(|p| p.display().to_string()));
                (format!("presburger check {}", value_name(&c.property)), inputs)
            }
            Command::Gf(g) => (format!("gf {}", value_name(&g.op)), vec![g.input.display().to_string()]),
        };
        let window = match &cli.window {
            Some(w) => (w[0], w[1]),
            None => DEFAULT_WINDOW,
        };
        if window.0 >= window.1 {
            return Err(Error::Invalid(format!("window needs T0 < T1, got {} {}", window.0, window.1)));
        }
        if cli.max_period == 0 || cli.max_degree == 0 || cli.quant_bound == 0 {
            return Err(Error::Invalid("max period, max degree and quantifier bound must be positive".into()));
        }
        let threads = match std::env::var("QPT_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("QPT_THREADS={s:?}")))?),
            Err(_) => cli.threads,
        };
        if threads == Some(0) {
            return Err(Error::Invalid("thread count must be positive".into()));
        }
        Ok(RunConfig {
            subcommand,
            inputs,
            window,
            max_period: cli.max_period,
            max_degree: cli.max_degree,
            quant_bound: cli.quant_bound,
            out: cli.out.clone(),
            threads,
        })
    }

    pub fn search(&self) -> FitSearch {
        FitSearch::split(self.window.0, self.window.1).bounds(self.max_period, self.max_degree)
    }
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// One sampled column set: direct value and predicted value per `t`.
#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub rows: Vec<SeriesRow>,
}

#[derive(Clone, Debug)]
pub struct SeriesRow {
    pub t: u64,
    pub value: Option<BigRational>,
    pub fitted: Option<BigRational>,
}

impl SeriesRow {
    fn residual(&self) -> Option<BigRational> {
        Some(self.value.as_ref()? - self.fitted.as_ref()?)
    }
}

pub struct Outcome {
    pub result: Value,
    pub series: Vec<Series>,
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Parse(_)) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, code, message) = match self {
            CliError::Lib(e) => (e.kind(), e.code(), e.to_string()),
            CliError::Io(m) => ("Io", 100, m.clone()),
            CliError::Usage(m) => ("Usage", 101, m.clone()),
        };
        json!({ "error": { "kind": kind, "code": code, "message": message } })
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Parses arguments, runs the subcommand and writes the report files.
/// Returns the process exit status; failures print error JSON to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Io(e.to_string()))?;
    let outcome = pool.install(|| commands::execute(&cli.command, &cfg))?;
    write_outputs(&cfg, &outcome)
}

fn write_outputs(cfg: &RunConfig, o: &Outcome) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", cfg.out.display()));
    fs::create_dir_all(&cfg.out).map_err(io)?;
    let report = json!({ "command": cfg.subcommand, "config": cfg, "result": o.result });
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(cfg.out.join("report.json"), text).map_err(io)?;

    let exact = |x: &Option<BigRational>| x.as_ref().map(rational_to_string).unwrap_or_default();
    let mut csv = String::from("series,t,value,fitted,residual\n");
    for s in &o.series {
        let mut dat = String::from("# t value fitted residual\n");
        for r in &s.rows {
            let _ = writeln!(csv, "{},{},{},{},{}", s.name, r.t, exact(&r.value), exact(&r.fitted), exact(&r.residual()));
            let _ = writeln!(dat, "{} {} {} {}", r.t, decimal(&r.value), decimal(&r.fitted), decimal(&r.residual()));
        }
        fs::write(cfg.out.join(format!("{}.dat", s.name)), dat).map_err(io)?;
    }
    fs::write(cfg.out.join("samples.csv"), csv).map_err(io)
}

fn decimal(x: &Option<BigRational>) -> String {
    match x {
        None => "nan".into(),
        Some(q) if q.is_integer() => q.to_integer().to_string(),
        Some(q) => q.to_f64().map_or_else(|| "nan".into(), |f| format!("{f}")),
    }
}
