//! `qsphere`: spectrum tables, harmonic coefficients, Jackson integrals and the
//! identity catalogue from the command line.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 bad input.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsphere::Potential;

use crate::output::Format;

/// Largest truncation the CLI accepts.
const LMAX_LIMIT: u32 = 64;

#[derive(Debug, Parser)]
#[command(name = "qsphere", version, about = "q-deformed angular momentum, harmonics and spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coulomb or oscillator levels E(n, l) for each q.
    Spectrum(SpectrumArgs),
    /// Polynomial coefficients of Phi_lm and Y_lm.
    Harmonics(HarmonicsArgs),
    /// Run every identity check and report residuals.
    Verify(VerifyArgs),
    /// Jackson integral of x^n over [-1, 1].
    Integrate(IntegrateArgs),
}

/// A q value kept as typed so high precision runs can parse it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QValue {
    pub text: String,
    pub value: f64,
}

fn parse_q(s: &str) -> Result<QValue, String> {
    let value: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("q must be a finite positive number, got {s}"));
    }
    Ok(QValue { text: s.to_owned(), value })
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("tolerance must be positive, got {s}"));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Double,
    High,
}

impl PrecisionArg {
    fn core(self) -> qsphere::Precision {
        match self {
            PrecisionArg::Double => qsphere::Precision::Double,
            PrecisionArg::High => qsphere::Precision::High,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrecisionArg::Double => "double",
            PrecisionArg::High => "high",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        self.core().default_tolerance()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialArg {
    Coulomb,
    Oscillator,
}

impl From<PotentialArg> for Potential {
    fn from(p: PotentialArg) -> Self {
        match p {
            PotentialArg::Coulomb => Potential::Coulomb,
            PotentialArg::Oscillator => Potential::Oscillator,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Deformation parameter; repeat for a sweep.
    #[arg(long = "q", value_parser = parse_q, default_value = "1")]
    pub q: Vec<QValue>,

    /// Absolute tolerance for checks.
    #[arg(long, value_parser = parse_tolerance)]
    pub tol: Option<f64>,

    #[arg(long, value_enum, env = "QSPHERE_PRECISION", default_value = "double")]
    pub precision: PrecisionArg,

    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    /// q values in sweep order with duplicates removed.
    pub fn sorted_q(&self) -> Vec<QValue> {
        let mut qs = self.q.clone();
        qs.sort_by(|a, b| a.value.total_cmp(&b.value));
        qs.dedup_by(|a, b| a.value == b.value);
        qs
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long, value_enum)]
    pub potential: PotentialArg,

    #[arg(long, default_value_t = 3)]
    pub nmax: u32,

    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=LMAX_LIMIT as i64))]
    pub lmax: u32,

    /// Also solve the radial equation numerically and compare.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct HarmonicsArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(0..=LMAX_LIMIT as i64))]
    pub lmax: u32,

    /// Take Phi_lm from the hypergeometric closed form instead of the recursion.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=LMAX_LIMIT as i64))]
    pub lmax: u32,

    /// Corrupt one position matrix element before checking.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub common: Common,

    /// Degree n of the monomial x^n.
    #[arg(long)]
    pub degree: u32,

    /// Truncate the Jackson series after this many terms (requires q < 1).
    #[arg(long)]
    pub series_depth: Option<usize>,
}

/// How a command ended, mapped onto the exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
}

impl From<qsphere::Error> for Failure {
    fn from(e: qsphere::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QSPHERE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("QSPHERE_THREADS must be a positive integer, got {raw}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (bytes, out, verdict) = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a).map(|r| (r.bytes, &a.common.out, r.verdict))?,
        Command::Harmonics(a) => commands::harmonics(a).map(|r| (r.bytes, &a.common.out, r.verdict))?,
        Command::Verify(a) => commands::verify(a).map(|r| (r.bytes, &a.common.out, r.verdict))?,
        Command::Integrate(a) => commands::integrate(a).map(|r| (r.bytes, &a.common.out, r.verdict))?,
    };
    match out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Failure::Usage(format!("cannot write output: {e}")))?;
        }
    }
    verdict
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
