use thiserror::Error;

/// Errors raised by the solver, the simulators and the lattice engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside its admissible range.
    #[error("{name} = {value} is out of range: expected {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    /// The ambiguity radius is too large for the explicit solution.
    #[error(
        "explicit solution requires r > b + sigma*kappa + (sigma+kappa)^2/2, \
         got r = {r} <= {threshold}"
    )]
    AmbiguityTooLarge { r: f64, threshold: f64 },

    /// A derived quantity needed by the explicit solution is out of range.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    /// A Girsanov kernel produced a value outside `[-kappa, kappa]`.
    #[error("kernel value {value} at t = {t} exceeds kappa = {kappa}")]
    KernelOutOfRange { value: f64, t: f64, kappa: f64 },

    /// Shock and policy paths are not defined on the same grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A lattice claim is deeper than the exact engines allow.
    #[error("lattice depth {depth} exceeds the cap of {cap}")]
    DepthExceeded { depth: usize, cap: usize },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, bound: &'static str) -> Self {
        Error::Domain { name, value, bound }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
