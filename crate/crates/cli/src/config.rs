//! Run configuration: flat `key = value` files with `#` comments.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use irrinv::simulate::random_piecewise_kernels;
use irrinv::verify::SweepParam;
use irrinv::{Estimator, KernelSpec, ModelParams, TimeGrid};

use crate::CliError;

/// Kernel argument before `kappa` and the seed are known.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelArg {
    Spec(KernelSpec),
    /// `const:-kappa` or `const:kappa`, with the sign.
    Kappa(f64),
    /// `random:<count>` piecewise-constant kernels drawn from the run seed.
    Random(usize),
}

impl KernelArg {
    pub fn resolve(&self, kappa: f64, seed: u64, pieces: usize) -> Vec<KernelSpec> {
        match self {
            KernelArg::Spec(k) => vec![k.clone()],
            KernelArg::Kappa(sign) => vec![KernelSpec::Constant(sign * kappa)],
            KernelArg::Random(n) => random_piecewise_kernels(*n, pieces, kappa, seed),
        }
    }
}

impl FromStr for KernelArg {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |why: &str| CliError::Config(format!("invalid kernel `{s}`: {why}"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<args>"))?;
        match kind {
            "const" => match rest {
                "-kappa" => Ok(KernelArg::Kappa(-1.0)),
                "kappa" | "+kappa" => Ok(KernelArg::Kappa(1.0)),
                v => Ok(KernelArg::Spec(KernelSpec::Constant(
                    parse_f64(v).map_err(|_| bad("bad value"))?,
                ))),
            },
            "pw" => {
                let mut ts = Vec::new();
                let mut vs = Vec::new();
                for piece in rest.split(',') {
                    let (t, v) = piece
                        .split_once(':')
                        .ok_or_else(|| bad("expected t:v pairs"))?;
                    ts.push(parse_f64(t).map_err(|_| bad("bad breakpoint"))?);
                    vs.push(parse_f64(v).map_err(|_| bad("bad value"))?);
                }
                KernelSpec::piecewise(ts, vs)
                    .map(KernelArg::Spec)
                    .map_err(|e| bad(&e.to_string()))
            }
            "random" => rest
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .map(KernelArg::Random)
                .ok_or_else(|| bad("expected a positive count")),
            _ => Err(bad("unknown kind, expected const, pw or random")),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse::<f64>()
}

/// One comparative-statics sweep `param:lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("invalid sweep `{s}`: expected param:lo:hi:n"));
        let parts: Vec<&str> = s.split(':').collect();
        let [p, lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        Ok(Sweep {
            param: p.parse().map_err(|_| bad())?,
            lo: parse_f64(lo).map_err(|_| bad())?,
            hi: parse_f64(hi).map_err(|_| bad())?,
            n: n.parse().map_err(|_| bad())?,
        })
    }
}

/// Lattice claim for the `gexp` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClaimArg {
    /// Terminal walk position.
    Terminal,
    Constant(f64),
    /// `max(B_T - strike, 0)`.
    Call(f64),
    /// Running maximum of the walk (path dependent).
    Max,
}

impl FromStr for ClaimArg {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "invalid claim `{s}`: expected terminal, max, constant:<v> or call:<k>"
            ))
        };
        match s.split_once(':') {
            None if s == "terminal" => Ok(ClaimArg::Terminal),
            None if s == "max" => Ok(ClaimArg::Max),
            Some(("constant", v)) => parse_f64(v).map(ClaimArg::Constant).map_err(|_| bad()),
            Some(("call", v)) => parse_f64(v).map(ClaimArg::Call).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for ClaimArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClaimArg::Terminal => f.write_str("terminal"),
            ClaimArg::Max => f.write_str("max"),
            ClaimArg::Constant(v) => write!(f, "constant:{v}"),
            ClaimArg::Call(k) => write!(f, "call:{k}"),
        }
    }
}

/// Fully resolved settings of one run.
///
/// Every field has a config key of the same name; `Option` fields take the
/// value `auto`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub seed: u64,
    pub paths: usize,
    /// Grid steps per unit time.
    pub steps: usize,
    /// Truncation horizon; `auto` picks `T` with `exp(-(r - b - sigma kappa) T) < 1e-4`.
    pub horizon: Option<f64>,
    /// `exp` (exponential time, the default) or `truncated`.
    pub estimator: EstimatorKind,
    /// Rate of the exponential time; `auto` uses `r` for bounded integrands
    /// (marginal values, multipliers) and `r/2` for payoffs.
    pub exp_rate: Option<f64>,
    /// Kernel of `simulate` and of the first-order conditions.
    pub kernel: String,
    /// Kernels of the worst-case scan, separated by `;`.
    pub kernels: Vec<String>,
    /// Pieces of each `random:<count>` kernel, switching at integer times.
    pub random_pieces: usize,
    /// Capacity levels of the first-order-condition report, in units of `K x`.
    pub c_grid: Vec<f64>,
    pub multiplier_scale: f64,
    /// Comparative statics sweeps `param:lo:hi:n`, separated by `;`.
    pub sweeps: Vec<Sweep>,
    /// Paths written to `paths.csv`.
    pub path_output: usize,
    pub depth: usize,
    pub lattice_kappa: f64,
    pub lattice_dt: f64,
    pub claim: ClaimArg,
    /// Worker threads; 0 uses every core. Does not affect any output.
    pub threads: usize,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    Exp,
    Truncated,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::reference(),
            seed: 1,
            paths: 20_000,
            steps: 252,
            horizon: None,
            estimator: EstimatorKind::Exp,
            exp_rate: None,
            kernel: "const:-kappa".into(),
            kernels: vec![
                "const:-kappa".into(),
                "const:0".into(),
                "const:kappa".into(),
                "random:20".into(),
            ],
            random_pieces: 5,
            c_grid: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            multiplier_scale: 1.0,
            sweeps: vec![
                "r:0.09:0.2:10".parse().expect("valid default"),
                "b:0:0.03:10".parse().expect("valid default"),
                "kappa:0:0.12:10".parse().expect("valid default"),
            ],
            path_output: 3,
            depth: 10,
            lattice_kappa: 0.5,
            lattice_dt: 0.01,
            claim: ClaimArg::Terminal,
            threads: 0,
            out: PathBuf::from("out"),
        }
    }
}

/// Keys that influence results, in file order. `threads` and `out` are left
/// out of report headers so outputs do not depend on them.
const RESULT_KEYS: &[&str] = &[
    "x",
    "c",
    "b",
    "sigma",
    "kappa",
    "r",
    "alpha",
    "delta",
    "seed",
    "paths",
    "steps",
    "horizon",
    "estimator",
    "exp_rate",
    "kernel",
    "kernels",
    "random_pieces",
    "c_grid",
    "multiplier_scale",
    "sweeps",
    "path_output",
    "depth",
    "lattice_kappa",
    "lattice_dt",
    "claim",
];

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

fn auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".into(), |x| x.to_string())
}

impl std::fmt::Display for Sweep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}:{}", self.param, self.lo, self.hi, self.n)
    }
}

impl RunConfig {
    /// Reads a config file over the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value, got `{raw}`", n + 1))
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("{key} = `{value}`: expected {what}"));
        let f = || parse_f64(value).map_err(|_| bad("a number"));
        let u = || {
            value
                .parse::<usize>()
                .map_err(|_| bad("a non-negative integer"))
        };
        let opt = || {
            if value == "auto" {
                Ok(None)
            } else {
                f().map(Some)
            }
        };
        let p = &mut self.params;
        match key {
            "x" => p.x = f()?,
            "c" => p.c = f()?,
            "b" => p.b = f()?,
            "sigma" => p.sigma = f()?,
            "kappa" => p.kappa = f()?,
            "r" => p.r = f()?,
            "alpha" => p.alpha = f()?,
            "delta" => p.delta = f()?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad("an unsigned 64-bit integer"))?
            }
            "paths" => self.paths = u()?,
            "steps" => self.steps = u()?,
            "horizon" => self.horizon = opt()?,
            "estimator" => {
                self.estimator = match value {
                    "exp" => EstimatorKind::Exp,
                    "truncated" => EstimatorKind::Truncated,
                    _ => return Err(bad("exp or truncated")),
                }
            }
            "exp_rate" => self.exp_rate = opt()?,
            "kernel" => {
                value.parse::<KernelArg>()?;
                self.kernel = value.to_string();
            }
            "kernels" => {
                let list: Vec<String> = value.split(';').map(|s| s.trim().to_string()).collect();
                for k in &list {
                    k.parse::<KernelArg>()?;
                }
                self.kernels = list;
            }
            "random_pieces" => self.random_pieces = u()?,
            "c_grid" => {
                self.c_grid = value
                    .split(',')
                    .map(parse_f64)
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("comma-separated numbers"))?
            }
            "multiplier_scale" => self.multiplier_scale = f()?,
            "sweeps" => {
                self.sweeps = value
                    .split(';')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_, _>>()?
            }
            "path_output" => self.path_output = u()?,
            "depth" => self.depth = u()?,
            "lattice_kappa" => self.lattice_kappa = f()?,
            "lattice_dt" => self.lattice_dt = f()?,
            "claim" => self.claim = value.parse()?,
            "threads" => self.threads = u()?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        let p = &self.params;
        match key {
            "x" => p.x.to_string(),
            "c" => p.c.to_string(),
            "b" => p.b.to_string(),
            "sigma" => p.sigma.to_string(),
            "kappa" => p.kappa.to_string(),
            "r" => p.r.to_string(),
            "alpha" => p.alpha.to_string(),
            "delta" => p.delta.to_string(),
            "seed" => self.seed.to_string(),
            "paths" => self.paths.to_string(),
            "steps" => self.steps.to_string(),
            "horizon" => auto(self.horizon),
            "estimator" => match self.estimator {
                EstimatorKind::Exp => "exp".into(),
                EstimatorKind::Truncated => "truncated".into(),
            },
            "exp_rate" => auto(self.exp_rate),
            "kernel" => self.kernel.clone(),
            "kernels" => self.kernels.join(";"),
            "random_pieces" => self.random_pieces.to_string(),
            "c_grid" => join(&self.c_grid, ","),
            "multiplier_scale" => self.multiplier_scale.to_string(),
            "sweeps" => join(&self.sweeps, ";"),
            "path_output" => self.path_output.to_string(),
            "depth" => self.depth.to_string(),
            "lattice_kappa" => self.lattice_kappa.to_string(),
            "lattice_dt" => self.lattice_dt.to_string(),
            "claim" => self.claim.to_string(),
            "threads" => self.threads.to_string(),
            "out" => self.out.display().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Result-relevant settings as `key = value` lines.
    pub fn result_lines(&self) -> Vec<String> {
        RESULT_KEYS
            .iter()
            .map(|k| format!("{k} = {}", self.value_of(k)))
            .collect()
    }

    /// The whole configuration in file format; reading it back gives `self`.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for line in self.result_lines() {
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(s, "threads = {}", self.threads);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    /// Checks the values that the core library does not validate itself.
    pub fn check(&self) -> Result<(), CliError> {
        if self.paths == 0 {
            return Err(CliError::Config("paths must be positive".into()));
        }
        if self.steps == 0 {
            return Err(CliError::Config("steps must be positive".into()));
        }
        if !(self.multiplier_scale > 0.0) {
            return Err(CliError::Config("multiplier_scale must be positive".into()));
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Config("horizon must be positive".into()));
            }
        }
        if let Some(rate) = self.exp_rate {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(CliError::Config("exp_rate must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn kernel_arg(&self) -> Result<KernelArg, CliError> {
        self.kernel.parse()
    }

    /// Kernels of the worst-case scan, `random:<count>` expanded.
    pub fn scan_kernels(&self) -> Result<Vec<KernelSpec>, CliError> {
        let mut out = Vec::new();
        for k in &self.kernels {
            out.extend(k.parse::<KernelArg>()?.resolve(
                self.params.kappa,
                self.seed,
                self.random_pieces,
            ));
        }
        Ok(out)
    }

    /// Truncation horizon, `auto` resolved.
    pub fn resolved_horizon(&self) -> f64 {
        self.horizon.unwrap_or_else(|| {
            let p = &self.params;
            let decay = p.r - p.b - p.sigma * p.kappa;
            if decay > 0.0 {
                (1e4f64).ln() / decay
            } else {
                100.0
            }
        })
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        let h = self.resolved_horizon();
        let n = ((h * self.steps as f64).ceil() as usize).max(1);
        TimeGrid::new(h, n).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Estimator for an integrand; `bounded` selects the `auto` rate.
    pub fn estimator(&self, bounded: bool) -> Estimator {
        match self.estimator {
            EstimatorKind::Truncated => Estimator::Truncated,
            EstimatorKind::Exp => {
                let r = self.params.r;
                Estimator::ExponentialTime {
                    rate: self.exp_rate.unwrap_or(if bounded { r } else { 0.5 * r }),
                }
            }
        }
    }
}
