use super::{
    optimal_policy_path, sample_shock_path, KernelSpec, PolicyPath, ShockPath, Stepper, TimeGrid,
};
use crate::closed_form::SolutionConstants;
use crate::error::Result;
use crate::model::{profit_unchecked, ModelParams, ValidParams};
use crate::rng::{map_paths, PathRng};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// Mean and standard error, summed sequentially in sample order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
                n,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let ss: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, std_error, n }
    }

    /// Whether `target` lies within `bands` standard errors of the mean.
    pub fn covers(&self, target: f64, bands: f64) -> bool {
        (self.mean - target).abs() <= bands * self.std_error
    }
}

/// How an integral over `[0, inf)` is estimated along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Trapezoidal quadrature on the grid; the tail beyond the horizon is dropped.
    Truncated,
    /// Integrand evaluated at an independent exponential time of the given rate,
    /// simulated with steps of the grid's `dt`; unbiased. A rate below `r` damps the
    /// tail and keeps the variance finite for fast-growing integrands.
    ExponentialTime { rate: f64 },
}

/// Monte Carlo run settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub n_paths: usize,
    pub seed: u64,
    pub grid: TimeGrid,
    pub estimator: Estimator,
}

impl McSettings {
    pub fn new(n_paths: usize, seed: u64, grid: TimeGrid, estimator: Estimator) -> Self {
        McSettings {
            n_paths,
            seed,
            grid,
            estimator,
        }
    }
}

/// Exponential-time weight: `E[w(tau) f(tau)] = int_0^inf e^{-rt} f(t) dt` for `tau ~ Exp(rate)`.
#[inline]
fn exp_time_weight(r: f64, rate: f64, tau: f64) -> f64 {
    (-(r - rate) * tau).exp() / rate
}

fn collect<T: Send>(n: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    map_paths(n, f).into_iter().collect()
}

/// Discounted profit (trapezoidal rule) minus discounted investment
/// `sum_i e^{-r t_i} dI_i`, the initial jump included at discount factor one.
pub fn discounted_payoff(
    shock: &ShockPath,
    policy: &PolicyPath,
    params: &ModelParams,
) -> Result<f64> {
    shock.check_grid(policy.grid, policy.capacity.len())?;
    if policy.investment.len() != policy.capacity.len() {
        return Err(crate::error::Error::GridMismatch(
            "capacity and investment lengths differ".into(),
        ));
    }
    let g = shock.grid;
    let dt = g.dt();
    let disc = |i: usize| (-params.r * g.time(i)).exp();
    let flow: Vec<f64> = (0..g.n_nodes())
        .map(|i| disc(i) * profit_unchecked(shock.shock[i], policy.capacity[i], params.alpha))
        .collect();
    let gross: f64 = flow.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    let cost: f64 = policy
        .increments()
        .enumerate()
        .map(|(i, d)| disc(i) * d)
        .sum();
    Ok(gross - cost)
}

/// Per-path payoffs of the plan tracking `k X` from capacity `params.c`, under `kernel`.
pub fn payoff_samples(
    params: &ModelParams,
    k: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Vec<f64>> {
    let c = params.c;
    match s.estimator {
        Estimator::Truncated => collect(s.n_paths, |i| {
            let path = sample_shock_path(params, kernel, s.grid, &mut PathRng::new(s.seed, i))?;
            let policy = optimal_policy_path(&path, k, c);
            discounted_payoff(&path, &policy, params)
        }),
        Estimator::ExponentialTime { rate } => collect(s.n_paths, |i| {
            let mut rng = PathRng::new(s.seed, i);
            let tau = rng.exponential(rate);
            let mut st = Stepper::new(params, kernel)?;
            st.run_until(tau, s.grid.dt(), &mut rng)?;
            let cap = c.max(k * st.running_max());
            // e^{-rT}C_T -> 0, so the cost integral equals int r e^{-rt} (C_t - c) dt
            let flow = profit_unchecked(st.shock(), cap, params.alpha) - params.r * (cap - c);
            Ok(exp_time_weight(params.r, rate, tau) * flow)
        }),
    }
}

/// Payoff of the optimal worst-case plan, evaluated under the prior `kernel`.
pub fn estimate_payoff(
    params: &ValidParams,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Estimate> {
    let k = SolutionConstants::solve(params)?.k;
    estimate_policy_payoff(params, k, kernel, s)
}

/// Payoff of the plan tracking `k X`, evaluated under the prior `kernel`.
pub fn estimate_policy_payoff(
    params: &ValidParams,
    k: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Estimate> {
    Ok(Estimate::from_samples(&payoff_samples(
        params, k, kernel, s,
    )?))
}

/// Per-path samples of `int_0^inf e^{-rs} inf_{u<=s} (X_s/X_u)^alpha ds` under `kernel`.
pub fn k_functional_samples(
    params: &ModelParams,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Vec<f64>> {
    let a = params.alpha;
    match s.estimator {
        Estimator::Truncated => collect(s.n_paths, |i| {
            let mut rng = PathRng::new(s.seed, i);
            let mut st = Stepper::new(params, kernel)?;
            let h = s.grid.dt();
            // inf_u X_s/X_u = X_s / max_u X_u, tracked in logs
            let mut prev = 1.0;
            let mut acc = 0.0;
            for j in 1..=s.grid.n_steps() {
                st.advance(h, &mut rng)?;
                let f = (-params.r * s.grid.time(j) + a * (st.log_x - st.log_max)).exp();
                acc += 0.5 * h * (prev + f);
                prev = f;
            }
            Ok(acc)
        }),
        Estimator::ExponentialTime { rate } => collect(s.n_paths, |i| {
            let mut rng = PathRng::new(s.seed, i);
            let tau = rng.exponential(rate);
            let mut st = Stepper::new(params, kernel)?;
            st.run_until(tau, s.grid.dt(), &mut rng)?;
            Ok(exp_time_weight(params.r, rate, tau) * (a * (st.log_x - st.log_max)).exp())
        }),
    }
}

pub fn k_functional(params: &ModelParams, kernel: &KernelSpec, s: &McSettings) -> Result<Estimate> {
    Ok(Estimate::from_samples(&k_functional_samples(
        params, kernel, s,
    )?))
}

/// Monte Carlo estimate of the base-capacity multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KEstimate {
    /// Estimate of `K^alpha`, the expectation itself.
    pub k_alpha: Estimate,
    /// `k_alpha.mean^(1/alpha)`.
    pub k: f64,
    /// Delta-method standard error of `k`.
    pub k_std_error: f64,
    /// Upper bound `e^{-rT}/r` on the dropped tail; zero for the exponential-time estimator.
    pub tail_bound: f64,
}

/// Estimates `K` under the worst-case prior `xi = -kappa`.
pub fn estimate_k_mc(params: &ValidParams, s: &McSettings) -> Result<KEstimate> {
    params.require_explicit()?;
    let raw = k_functional(params, &KernelSpec::Constant(-params.kappa), s)?;
    let a = params.alpha;
    let k = raw.mean.powf(1.0 / a);
    let tail_bound = match s.estimator {
        Estimator::Truncated => (-params.r * s.grid.horizon()).exp() / params.r,
        Estimator::ExponentialTime { .. } => 0.0,
    };
    Ok(KEstimate {
        k_alpha: raw,
        k,
        k_std_error: k / (a * raw.mean) * raw.std_error,
        tail_bound,
    })
}

/// Per-path samples of `int_0^inf e^{-rs} pi_c(X_s, C_s) ds` where `C` tracks `k X`
/// from initial capacity `c0`, evaluated under `kernel`.
pub fn marginal_value_samples(
    params: &ModelParams,
    k: f64,
    c0: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Vec<f64>> {
    let a = params.alpha;
    match s.estimator {
        Estimator::Truncated => collect(s.n_paths, |i| {
            let mut rng = PathRng::new(s.seed, i);
            let mut st = Stepper::new(params, kernel)?;
            let h = s.grid.dt();
            let mc = |st: &Stepper<'_>| (st.shock() / c0.max(k * st.running_max())).powf(a);
            let mut prev = mc(&st);
            let mut acc = 0.0;
            for j in 1..=s.grid.n_steps() {
                st.advance(h, &mut rng)?;
                let f = (-params.r * s.grid.time(j)).exp() * mc(&st);
                acc += 0.5 * h * (prev + f);
                prev = f;
            }
            Ok(acc)
        }),
        Estimator::ExponentialTime { rate } => collect(s.n_paths, |i| {
            let mut rng = PathRng::new(s.seed, i);
            let tau = rng.exponential(rate);
            let mut st = Stepper::new(params, kernel)?;
            st.run_until(tau, s.grid.dt(), &mut rng)?;
            let cap = c0.max(k * st.running_max());
            Ok(exp_time_weight(params.r, rate, tau) * (st.shock() / cap).powf(a))
        }),
    }
}

/// Per-path samples of `int_0^inf e^{-rt} dI_t` for the plan tracking `k X` from `params.c`,
/// the initial jump included.
pub fn investment_cost_samples(
    params: &ModelParams,
    k: f64,
    kernel: &KernelSpec,
    s: &McSettings,
) -> Result<Vec<f64>> {
    let c = params.c;
    match s.estimator {
        Estimator::Truncated => collect(s.n_paths, |i| {
            let path = sample_shock_path(params, kernel, s.grid, &mut PathRng::new(s.seed, i))?;
            let policy = optimal_policy_path(&path, k, c);
            Ok(policy
                .increments()
                .enumerate()
                .map(|(j, d)| (-params.r * s.grid.time(j)).exp() * d)
                .sum())
        }),
        Estimator::ExponentialTime { rate } => collect(s.n_paths, |i| {
            let mut rng = PathRng::new(s.seed, i);
            let tau = rng.exponential(rate);
            let mut st = Stepper::new(params, kernel)?;
            st.run_until(tau, s.grid.dt(), &mut rng)?;
            let cap = c.max(k * st.running_max());
            Ok(exp_time_weight(params.r, rate, tau) * params.r * (cap - c))
        }),
    }
}

/// Exponential-time estimates of the two parts of the value of the optimal plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrossAndCost {
    /// Gross profit via the tilted measure: `x^alpha / ((1-alpha) r~) E^Q[C^{1-alpha}]`
    /// at an `Exp(r~)` time.
    pub gross: Estimate,
    /// Gross profit evaluated directly under the worst-case prior: `E[pi(X, C)] / r`
    /// at an `Exp(r)` time.
    pub gross_direct: Estimate,
    /// Investment cost `E[C] - c` at an `Exp(r)` time.
    pub cost: Estimate,
}

pub fn estimate_gross_and_cost(params: &ValidParams, s: &McSettings) -> Result<GrossAndCost> {
    let consts = SolutionConstants::solve(params)?;
    let (k, c, a, r) = (consts.k, params.c, params.alpha, params.r);
    let step = s.grid.dt();

    // Under the tilt by e^{alpha Y - phi(alpha) t} the Brownian drift moves by alpha*sigma.
    let tilted = KernelSpec::Constant(-params.kappa + a * params.sigma);
    let scale = params.x.powf(a) / ((1.0 - a) * consts.r_tilde);
    let gross = collect(s.n_paths, |i| {
        let mut rng = PathRng::new(s.seed, i);
        let tau = rng.exponential(consts.r_tilde);
        let mut st = Stepper::unchecked(params, &tilted)?;
        st.run_until(tau, step, &mut rng)?;
        Ok(scale * c.max(k * st.running_max()).powf(1.0 - a))
    })?;

    let worst = KernelSpec::Constant(-params.kappa);
    let pairs = collect(s.n_paths, |i| {
        let mut rng = PathRng::new(s.seed, i);
        let tau = rng.exponential(r);
        let mut st = Stepper::new(params, &worst)?;
        st.run_until(tau, step, &mut rng)?;
        let cap = c.max(k * st.running_max());
        Ok((profit_unchecked(st.shock(), cap, a) / r, cap - c))
    })?;
    let direct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let cost: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(GrossAndCost {
        gross: Estimate::from_samples(&gross),
        gross_direct: Estimate::from_samples(&direct),
        cost: Estimate::from_samples(&cost),
    })
}
