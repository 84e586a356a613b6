//! Discrete g-expectations on a symmetric binomial lattice.
//!
//! A claim is a terminal payoff on a random walk with increments `+-sqrt(dt)`.
//! Its g-expectation is computed by the backward recursion
//!
//! ```text
//! y = (y_up + y_down) / 2 + g(t, z) dt,    z = (y_up - y_down) / (2 sqrt(dt))
//! ```
//!
//! For the `kappa`-ignorance driver `g(z) = -kappa |z|` the recursion coincides
//! with the minimum over priors that tilt the up-probability to
//! `(1 + theta sqrt(dt)) / 2` with `|theta| <= kappa`, which
//! [`brute_force_lower_expectation`] computes directly.

mod driver;
mod lattice;

pub use driver::{convex_dual, Driver, DualValue};
pub use lattice::{
    brute_force_lower_expectation, brute_force_upper_expectation, conditional_values,
    g_expectation_lattice, LatticeClaim, MAX_DEPTH,
};
