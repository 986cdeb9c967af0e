//! `specweight`: recover diagonal canonical systems from sampling measures
//! and audit the related Krein, Muckenhoupt and Wiener–Hopf computations.

mod commands;
mod io;
mod report;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "specweight", version, about)]
struct Cli {
    /// Worker threads (default: SPECWEIGHT_THREADS, else all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover w on [0, a] from a measure config
    Recover(RecoverArgs),
    /// Compare de Branges kernels of a weight with T_{μ,r}^{-1} sinc_{r,λ}
    Verify(VerifyArgs),
    /// A₂ characteristic of a weight
    A2(A2Args),
    /// Simplex-functional certificate for a weight
    Prop1(Prop1Args),
    /// Tabulate the Krein functions P_t, P_t* of a weight
    Krein(KreinArgs),
    /// Triangular factorization of a Wiener–Hopf operator
    Factorize(FactorizeArgs),
    /// Boundary limit of the outer function for 1 − μ·χ_[−π,π]
    Sakhnovich(SakhnovichArgs),
    /// Run the built-in example suite
    Selftest(SelftestArgs),
}

#[derive(Args, Serialize)]
pub struct RecoverArgs {
    /// Measure config (TOML)
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long)]
    pub a: f64,
    /// Grid cells M
    #[arg(long, default_value_t = 64)]
    pub cells: usize,
    /// Lattice half-size N at r = a
    #[arg(long, default_value_t = 96)]
    pub basis: usize,
    /// Whittaker smoothing parameter for the differentiated weight
    #[arg(long)]
    pub smooth: Option<f64>,
    /// (r, mass, w) CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path (stdout when absent)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the Gram matrix at r = a as CSV
    #[arg(long)]
    pub dump_gram: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// Weight CSV with r and w columns; recovered from the measure when absent
    #[arg(long)]
    pub weight: Option<PathBuf>,
    /// Window for recovery when no weight is given
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 64)]
    pub cells: usize,
    #[arg(long, default_value_t = 96)]
    pub basis: usize,
    /// Number of random probes (r, λ, z)
    #[arg(long, default_value_t = 5)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest acceptable residual
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Auto,
    CellAligned,
    AnchoredDyadic,
}

#[derive(Args, Serialize)]
pub struct A2Args {
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long, value_enum, default_value_t = Family::Auto)]
    pub family: Family,
    /// Also run the reverse Hölder probe over p = 1, 1.25, …, this value
    #[arg(long)]
    pub p_max: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct Prop1Args {
    #[arg(long)]
    pub weight: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
    /// Number of equally spaced radii in (0, a]
    #[arg(long, default_value_t = 8)]
    pub radii: usize,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct KreinArgs {
    #[arg(long)]
    pub weight: PathBuf,
    /// Spectral parameter as `re,im`; repeatable (write `--z=-1,0.5` for a negative real part)
    #[arg(long = "z", value_parser = parse_complex, required = true)]
    pub z: Vec<Complex64>,
    /// Random Christoffel–Darboux probes
    #[arg(long, default_value_t = 5)]
    pub probes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// (z_re, z_im, t, P re/im, P* re/im) CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Delta,
    Sinc,
    Exp,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Sakh,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cholesky,
    Reverse,
    Fmu,
}

#[derive(Args, Serialize)]
pub struct FactorizeArgs {
    /// Convolution kernel: δ, −μ·sinc(πx), or c·e^{−|x|}
    #[arg(long, value_enum, conflicts_with = "symbol", required_unless_present = "symbol")]
    pub kernel: Option<KernelKind>,
    /// Symbol 1 − μ·χ_[−π,π]
    #[arg(long, value_enum)]
    pub symbol: Option<SymbolKind>,
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    /// Amplitude of the exponential kernel
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Method::Cholesky)]
    pub method: Method,
    /// Lattice half-size for the recovery inside `fmu`
    #[arg(long, default_value_t = 96)]
    pub basis: usize,
    /// Factor A as CSV (row i, column j)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the operator matrix W as CSV
    #[arg(long)]
    pub dump_gram: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SakhnovichArgs {
    #[arg(long)]
    pub mu: f64,
    /// Smallest y in the table of Π(iy)
    #[arg(long, default_value_t = 1e-4)]
    pub ymin: f64,
    /// (y, Π(iy)) CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SelftestArgs {
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re,im`, got `{s}`")),
    }
}

/// Exit status classes: 2 for bad input, 1 for numerical failure.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<specweight::Error> for Failure {
    fn from(e: specweight::Error) -> Self {
        use specweight::Error::*;
        match e {
            NotSampling { .. } | NotPositiveDefinite { .. } | SingularMatrix | NonMonotoneMass { .. } => {
                Failure::Numerical(e.into())
            }
            _ => Failure::Config(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<specweight::Error>() {
            Ok(inner) => inner.into(),
            Err(e) => Failure::Config(e),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.into())
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("SPECWEIGHT_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("SPECWEIGHT_THREADS={v} is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thread_count(cli.threads) {
        Ok(Some(n)) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        Ok(_) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match &cli.command {
        Command::Recover(a) => commands::recover(a),
        Command::Verify(a) => commands::verify(a),
        Command::A2(a) => commands::a2(a),
        Command::Prop1(a) => commands::prop1(a),
        Command::Krein(a) => commands::krein(a),
        Command::Factorize(a) => commands::factorize(a),
        Command::Sakhnovich(a) => commands::sakhnovich(a),
        Command::Selftest(a) => selftest::run(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
