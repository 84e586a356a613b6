//! Irreversible investment under Knightian uncertainty.
//!
//! The crate solves the capacity expansion problem of a firm that evaluates
//! profits with the `kappa`-ignorance g-expectation, and provides the tools to
//! check the solution numerically:
//!
//! - [`model`]: parameters and the Cobb-Douglas profit function,
//! - [`closed_form`]: the base-capacity multiplier `K` and the value function,
//! - [`simulate`]: shock paths under bounded Girsanov kernels, tracking policies
//!   and Monte Carlo estimators,
//! - [`gexpect`]: g-expectations on a binomial lattice with a brute-force
//!   prior-minimisation oracle,
//! - [`verify`]: first-order conditions, worst-case-prior scans and comparative statics.

// `!(x > 0.0)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod error;
pub mod gexpect;
pub mod model;
pub mod rng;
pub mod simulate;
pub mod verify;

pub use closed_form::{value_function, value_function_dc, SolutionConstants};
pub use error::{Error, Result};
pub use model::{ModelParams, ValidParams};
pub use simulate::{Estimate, Estimator, KernelSpec, McSettings, TimeGrid};

/// Crate version, recorded in report headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
