//! Monte Carlo simulation of shock paths under bounded Girsanov kernels,
//! base-capacity policies and discounted payoffs.
//!
//! Two estimators of infinite-horizon discounted integrals are provided:
//! truncating the path at a finite horizon, and evaluating the integrand at an
//! independent exponential time, which is unbiased. Shock paths are simulated
//! exactly at the grid nodes; the running maximum additionally includes the
//! maximum of the Brownian bridge inside each step, so continuously monitored
//! quantities carry no discretisation bias at the nodes.

mod estimate;
mod kernel;
mod path;
mod policy;

pub use estimate::{
    discounted_payoff, estimate_gross_and_cost, estimate_k_mc, estimate_payoff,
    estimate_policy_payoff, investment_cost_samples, k_functional, k_functional_samples,
    marginal_value_samples, payoff_samples, Estimate, Estimator, GrossAndCost, KEstimate,
    McSettings,
};
pub use kernel::{random_piecewise_kernels, FeedbackRule, KernelSpec};
pub use path::{sample_shock_path, ShockPath};
pub use policy::{
    optimal_policy_path, optimal_policy_path_continuous, track_base_capacity, PolicyPath,
};

pub(crate) use path::Stepper;

use crate::error::{Error, Result};

/// Uniform grid `t_i = i * horizon / n_steps` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain("horizon", horizon, "0 < horizon < inf"));
        }
        if n_steps == 0 {
            return Err(Error::domain("n_steps", 0.0, "n_steps >= 1"));
        }
        Ok(TimeGrid { horizon, n_steps })
    }

    /// Grid with `steps_per_unit` steps per unit of time (rounded up).
    pub fn with_resolution(horizon: f64, steps_per_unit: usize) -> Result<Self> {
        if steps_per_unit == 0 {
            return Err(Error::domain("steps_per_unit", 0.0, "steps_per_unit >= 1"));
        }
        let n = (horizon * steps_per_unit as f64).ceil().max(1.0);
        TimeGrid::new(horizon, n as usize)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(move |i| self.time(i))
    }
}
