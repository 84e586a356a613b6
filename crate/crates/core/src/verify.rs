//! Numerical checks of the optimality claims of the explicit solution.
//!
//! Every Monte Carlo verdict uses a band of [`BANDS`] standard errors.

use std::fmt;

use crate::closed_form::SolutionConstants;
use crate::error::{Error, Result};
use crate::model::{ModelParams, ValidParams};
use crate::simulate::{
    investment_cost_samples, k_functional_samples, marginal_value_samples, payoff_samples,
    Estimate, KernelSpec, McSettings,
};

/// Width of every confidence band, in standard errors.
pub const BANDS: f64 = 3.0;

// Independent stream family for the discounted-investment leg of the flat-off statistic.
const COST_SALT: u64 = 0x5bd1_e995_0000_0001;

fn require_paths(s: &McSettings) -> Result<()> {
    if s.n_paths < 2 {
        return Err(Error::domain(
            "n_paths",
            s.n_paths as f64,
            "at least 2 paths",
        ));
    }
    Ok(())
}

/// Paired estimate of `mean(a) - mean(b)` for samples sharing random numbers.
fn paired_difference(a: &[f64], b: &[f64]) -> Estimate {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Estimate::from_samples(&d)
}

/// Estimate of `E^xi[int_0^inf e^{-rs} pi_c(X_s, C*_s) ds]` where `C*` is the
/// optimal plan started at capacity `c0`.
pub fn marginal_value(
    params: &ValidParams,
    c0: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Estimate> {
    let k = SolutionConstants::solve(params)?.k;
    marginal_value_with_multiplier(params, k, c0, kernel, s)
}

fn marginal_value_with_multiplier(
    params: &ModelParams,
    k: f64,
    c0: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Estimate> {
    require_paths(s)?;
    if !(c0 >= 0.0 && c0.is_finite()) {
        return Err(Error::domain("c0", c0, "c0 >= 0"));
    }
    Ok(Estimate::from_samples(&marginal_value_samples(
        params, k, c0, kernel, s,
    )?))
}

/// Classification of a marginal value against the unit cost of capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocVerdict {
    /// Equal to one within the band: the capacity sits on the investment boundary.
    AtBoundary,
    /// Below one beyond the band: investing is not worthwhile.
    Interior,
    /// Above one beyond the band: the first condition fails.
    Violation,
}

impl FocVerdict {
    pub fn classify(e: &Estimate) -> Self {
        if e.mean > 1.0 + BANDS * e.std_error {
            FocVerdict::Violation
        } else if e.mean < 1.0 - BANDS * e.std_error {
            FocVerdict::Interior
        } else {
            FocVerdict::AtBoundary
        }
    }
}

impl fmt::Display for FocVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FocVerdict::AtBoundary => "at-boundary",
            FocVerdict::Interior => "interior",
            FocVerdict::Violation => "VIOLATION",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocRow {
    pub c0: f64,
    pub estimate: Estimate,
    pub verdict: FocVerdict,
}

/// Complementarity statistic `E[int_0^inf e^{-rt} (M_t - 1) dI_t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatOff {
    /// Marginal value on the boundary state `(1, k)`, shared by all investment times.
    pub boundary_marginal: Estimate,
    /// `E[int_0^inf e^{-rt} dI_t]`.
    pub discounted_investment: Estimate,
    pub value: f64,
    pub std_error: f64,
}

impl FlatOff {
    pub fn is_zero(&self) -> bool {
        self.value.abs() <= BANDS * self.std_error
    }
}

/// First-order-condition report for one policy multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct FocReport {
    /// Multiplier of the tested plan (the optimal `K` times the requested scale).
    pub multiplier: f64,
    pub rows: Vec<FocRow>,
    pub flat_off: FlatOff,
}

impl FocReport {
    /// True when no row exceeds one and the flat-off statistic is zero within the band.
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != FocVerdict::Violation) && self.flat_off.is_zero()
    }
}

/// Runs [`marginal_value`] over `c_grid` for the plan tracking `scale * K * X`,
/// and estimates the flat-off statistic of that plan from the initial state.
///
/// The marginal value of capacity depends on the state only through `c / x`,
/// so at every investment time of the plan it equals the value at `(1, scale * K)`.
pub fn foc_report(
    params: &ValidParams,
    c_grid: &[f64],
    kernel: &KernelSpec,
    s: &McSettings,
    scale: f64,
) -> Result<FocReport> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::domain("multiplier scale", scale, "scale > 0"));
    }
    let k = scale * SolutionConstants::solve(params)?.k;
    let rows = c_grid
        .iter()
        .map(|&c0| {
            let estimate = marginal_value_with_multiplier(params, k, c0, kernel, s)?;
            Ok(FocRow {
                c0,
                estimate,
                verdict: FocVerdict::classify(&estimate),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let unit = params.with_state(1.0, k)?;
    let boundary = marginal_value_with_multiplier(&unit, k, k, kernel, s)?;
    let cost_settings = McSettings {
        seed: s.seed ^ COST_SALT,
        ..*s
    };
    let invest = discounted_investment(params, k, kernel, &cost_settings)?;
    let gap = boundary.mean - 1.0;
    let value = gap * invest.mean;
    let std_error =
        ((invest.mean * boundary.std_error).powi(2) + (gap * invest.std_error).powi(2)).sqrt();
    Ok(FocReport {
        multiplier: k,
        rows,
        flat_off: FlatOff {
            boundary_marginal: boundary,
            discounted_investment: invest,
            value,
            std_error,
        },
    })
}

/// `E[int_0^inf e^{-rt} dI_t]` for the plan tracking `k X` from `params.c`, initial jump included.
fn discounted_investment(
    params: &ModelParams,
    k: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Estimate> {
    require_paths(s)?;
    Ok(Estimate::from_samples(&investment_cost_samples(
        params, k, kernel, s,
    )?))
}

/// Backward-equation residual `M(1, K) - 1` of the optimal base capacity.
pub fn backward_residual(
    params: &ValidParams,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Estimate> {
    let k = SolutionConstants::solve(params)?.k;
    let unit = params.with_state(1.0, k)?;
    let m = marginal_value_with_multiplier(&unit, k, k, kernel, s)?;
    Ok(Estimate {
        mean: m.mean - 1.0,
        ..m
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseRow {
    pub kernel: KernelSpec,
    pub estimate: Estimate,
    /// Paired estimate of this row minus the `Constant(-kappa)` row.
    pub excess: Estimate,
    pub is_argmin: bool,
}

/// Payoff of the fixed optimal plan under a list of priors.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseTable {
    pub rows: Vec<WorstCaseRow>,
    /// Index of the `Constant(-kappa)` row.
    pub reference: usize,
}

impl WorstCaseTable {
    /// True when no kernel undercuts `Constant(-kappa)` beyond the band.
    pub fn worst_case_holds(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.excess.mean >= -BANDS * r.excess.std_error)
    }

    pub fn argmin(&self) -> usize {
        self.rows.iter().position(|r| r.is_argmin).unwrap_or(0)
    }
}

/// Evaluates the plan tracking `K X` under each kernel with common random numbers.
///
/// `Constant(-kappa)` is added as the first row when absent.
pub fn worst_case_scan(
    params: &ValidParams,
    kernels: &[KernelSpec],
    s: &McSettings,
) -> Result<WorstCaseTable> {
    require_paths(s)?;
    let k = SolutionConstants::solve(params)?.k;
    let worst = KernelSpec::Constant(-params.kappa);
    let mut list = kernels.to_vec();
    let reference = match list.iter().position(|q| *q == worst) {
        Some(i) => i,
        None => {
            list.insert(0, worst);
            0
        }
    };
    let samples = list
        .iter()
        .map(|q| payoff_samples(params, k, q, s))
        .collect::<Result<Vec<_>>>()?;
    let means: Vec<Estimate> = samples.iter().map(|v| Estimate::from_samples(v)).collect();
    let argmin = means
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mean.total_cmp(&b.1.mean))
        .map_or(0, |(i, _)| i);
    let rows = list
        .into_iter()
        .enumerate()
        .map(|(i, kernel)| WorstCaseRow {
            kernel,
            estimate: means[i],
            excess: paired_difference(&samples[i], &samples[reference]),
            is_argmin: i == argmin,
        })
        .collect();
    Ok(WorstCaseTable { rows, reference })
}

/// Monte Carlo estimate of `K_xi = E^xi[int_0^inf e^{-rs} inf_{u<=s} (X_s/X_u)^alpha ds]`
/// for a constant kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KXiEstimate {
    pub xi: f64,
    /// The expectation itself.
    pub raw: Estimate,
    /// `raw^(1/alpha)`, the capacity multiplier scale.
    pub powered: f64,
    pub powered_std_error: f64,
}

fn k_xi_from_samples(xi: f64, alpha: f64, samples: &[f64]) -> KXiEstimate {
    let raw = Estimate::from_samples(samples);
    let powered = raw.mean.powf(1.0 / alpha);
    KXiEstimate {
        xi,
        raw,
        powered,
        powered_std_error: powered / (alpha * raw.mean) * raw.std_error,
    }
}

pub fn k_xi_estimate(params: &ValidParams, xi: f64, s: &McSettings) -> Result<KXiEstimate> {
    require_paths(s)?;
    let samples = k_functional_samples(params, &KernelSpec::Constant(xi), s)?;
    Ok(k_xi_from_samples(xi, params.alpha, &samples))
}

/// Two constant-kernel multipliers estimated with common random numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KXiComparison {
    pub first: KXiEstimate,
    pub second: KXiEstimate,
    /// Paired estimate of `second.raw - first.raw`.
    pub difference: Estimate,
}

impl KXiComparison {
    /// True when the second multiplier exceeds the first beyond the band.
    pub fn ordered(&self) -> bool {
        self.difference.mean > BANDS * self.difference.std_error
    }
}

pub fn k_xi_comparison(
    params: &ValidParams,
    xi1: f64,
    xi2: f64,
    s: &McSettings,
) -> Result<KXiComparison> {
    require_paths(s)?;
    let a = k_functional_samples(params, &KernelSpec::Constant(xi1), s)?;
    let b = k_functional_samples(params, &KernelSpec::Constant(xi2), s)?;
    Ok(KXiComparison {
        first: k_xi_from_samples(xi1, params.alpha, &a),
        second: k_xi_from_samples(xi2, params.alpha, &b),
        difference: paired_difference(&b, &a),
    })
}

/// Parameter varied by [`statics_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    R,
    B,
    Kappa,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::R => "r",
            SweepParam::B => "b",
            SweepParam::Kappa => "kappa",
        }
    }

    /// Sign of `dK / dparam`.
    pub fn expected_direction(self) -> f64 {
        match self {
            SweepParam::B => 1.0,
            SweepParam::R | SweepParam::Kappa => -1.0,
        }
    }

    fn apply(self, p: &ModelParams, v: f64) -> ModelParams {
        let mut q = *p;
        match self {
            SweepParam::R => q.r = v,
            SweepParam::B => q.b = v,
            SweepParam::Kappa => q.kappa = v,
        }
        q
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(SweepParam::R),
            "b" => Ok(SweepParam::B),
            "kappa" => Ok(SweepParam::Kappa),
            _ => Err(Error::domain(
                "sweep parameter",
                f64::NAN,
                "one of r, b, kappa",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticsRow {
    pub value: f64,
    /// Multiplier and value `v(x, c)` at the point, or the reason the point is invalid.
    pub outcome: std::result::Result<(f64, f64), Error>,
}

impl StaticsRow {
    pub fn k(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|o| o.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Holds,
    Fails,
    /// Some grid point is invalid.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticsTable {
    pub param: SweepParam,
    pub rows: Vec<StaticsRow>,
}

impl StaticsTable {
    /// Strict monotonicity of `K` in the expected direction along the grid order.
    pub fn verdict(&self) -> Monotonicity {
        let ks: Option<Vec<f64>> = self.rows.iter().map(StaticsRow::k).collect();
        let Some(ks) = ks else {
            return Monotonicity::Incomplete;
        };
        let dir = self.param.expected_direction();
        let ok = self.rows.windows(2).zip(ks.windows(2)).all(|(p, k)| {
            let step = (k[1] - k[0]) * dir * (p[1].value - p[0].value).signum();
            step > 1e-12 * k[0].abs()
        });
        if ok {
            Monotonicity::Holds
        } else {
            Monotonicity::Fails
        }
    }
}

/// Closed-form `K` and `v(x, c)` at every grid point; invalid points are reported, not fatal.
pub fn statics_sweep(params: &ModelParams, param: SweepParam, grid: &[f64]) -> StaticsTable {
    let rows = grid
        .iter()
        .map(|&v| {
            let q = param.apply(params, v);
            let outcome = q.validate().and_then(|vp| {
                vp.require_explicit()?;
                let consts = SolutionConstants::solve(&vp)?;
                let value = crate::closed_form::value_function(vp.x, vp.c, &vp, &consts)?;
                Ok((consts.k, value))
            });
            StaticsRow { value: v, outcome }
        })
        .collect();
    StaticsTable { param, rows }
}

/// Evenly spaced grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
