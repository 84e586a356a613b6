//! Command-line front end of the `irrinv` toolkit.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 I/O error.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod report;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<irrinv::Error> for CliError {
    fn from(e: irrinv::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "irrinv",
    version,
    about = "Irreversible investment under kappa-ignorance: solver and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the closed-form constants and value function.
    Solve(Opts),
    /// Simulate the optimal plan; writes summary.csv and paths.csv.
    Simulate(Opts),
    /// Check first-order conditions, worst-case minimality and comparative statics;
    /// writes summary.csv, foc.csv, worstcase.csv and statics.csv.
    Verify(Opts),
    /// Compare the lattice g-expectation with the prior-minimisation oracle.
    Gexp(Opts),
}

/// Flags override values read from `--config`. Every config key can also be set
/// with `--set key=value`.
#[derive(Debug, Args)]
struct Opts {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Grid steps per unit time.
    #[arg(long)]
    steps: Option<usize>,
    /// Truncation horizon (or `auto`).
    #[arg(long)]
    horizon: Option<String>,
    /// Kernel: const:<v> | const:-kappa | pw:<t1:v1,...> | random:<count>.
    #[arg(long)]
    kernel: Option<String>,
    /// Worst-case scan kernel; repeat to build the list.
    #[arg(long = "scan")]
    scan: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Scale applied to the optimal multiplier in the first-order-condition report.
    #[arg(long, allow_negative_numbers = true)]
    multiplier_scale: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// exp | truncated.
    #[arg(long)]
    estimator: Option<String>,
    /// Lattice depth for `gexp`.
    #[arg(long)]
    depth: Option<usize>,
    /// Lattice claim: terminal | max | constant:<v> | call:<k>.
    #[arg(long)]
    claim: Option<String>,
    /// Any config key, as key=value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Opts {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        fn s<T: ToString>(v: &Option<T>) -> Option<String> {
            v.as_ref().map(ToString::to_string)
        }
        let flags: [(&str, Option<String>); 18] = [
            ("seed", s(&self.seed)),
            ("paths", s(&self.paths)),
            ("steps", s(&self.steps)),
            ("horizon", self.horizon.clone()),
            ("kernel", self.kernel.clone()),
            ("threads", s(&self.threads)),
            ("multiplier_scale", s(&self.multiplier_scale)),
            ("x", s(&self.x)),
            ("c", s(&self.c)),
            ("b", s(&self.b)),
            ("sigma", s(&self.sigma)),
            ("kappa", s(&self.kappa)),
            ("r", s(&self.r)),
            ("alpha", s(&self.alpha)),
            ("delta", s(&self.delta)),
            ("estimator", self.estimator.clone()),
            ("depth", s(&self.depth)),
            ("claim", self.claim.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if !self.scan.is_empty() {
            cfg.set("kernels", &self.scan.join(";"))?;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.check()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

type Handler = fn(&RunConfig) -> Result<(), CliError>;

fn execute(cmd: Command) -> Result<(), CliError> {
    let (opts, f): (&Opts, Handler) = match &cmd {
        Command::Solve(o) => (o, commands::solve),
        Command::Simulate(o) => (o, commands::simulate),
        Command::Verify(o) => (o, commands::verify),
        Command::Gexp(o) => (o, commands::gexp),
    };
    let cfg = opts.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", cfg.threads)))?;
    pool.install(|| f(&cfg))
}
