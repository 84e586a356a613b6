use std::fmt;

use crate::error::{Error, Result};
use crate::rng::PathRng;

/// Girsanov kernel `xi_t` selecting a prior with Brownian drift shifted by `xi_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Constant(f64),
    /// `values[k]` applies on `[breakpoints[k], breakpoints[k+1])`; before the first
    /// breakpoint the first value applies and the last value persists forever.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Kernel computed from the current shock level.
    Feedback(FeedbackRule),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedbackRule {
    /// `below` while `X_t < level`, `above` otherwise.
    Threshold { level: f64, below: f64, above: f64 },
    /// `gain * ln(X_t)`; leaves `[-kappa, kappa]` once the shock moves far enough.
    LogLinear { gain: f64 },
}

impl KernelSpec {
    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::domain(
                "breakpoints",
                breakpoints.len() as f64,
                "as many breakpoints as values, at least one",
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "breakpoints",
                f64::NAN,
                "strictly increasing",
            ));
        }
        Ok(KernelSpec::PiecewiseConstant {
            breakpoints,
            values,
        })
    }

    /// Kernel value at time `t` and shock level `x`, checked against `kappa`.
    pub fn value(&self, t: f64, x: f64, kappa: f64) -> Result<f64> {
        let xi = self.raw_value(t, x);
        if !(xi.abs() <= kappa * (1.0 + 1e-12)) {
            return Err(Error::KernelOutOfRange {
                value: xi,
                t,
                kappa,
            });
        }
        Ok(xi)
    }

    pub(crate) fn raw_value(&self, t: f64, x: f64) -> f64 {
        match self {
            KernelSpec::Constant(v) => *v,
            KernelSpec::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                values[k.saturating_sub(1)]
            }
            KernelSpec::Feedback(FeedbackRule::Threshold {
                level,
                below,
                above,
            }) => {
                if x < *level {
                    *below
                } else {
                    *above
                }
            }
            KernelSpec::Feedback(FeedbackRule::LogLinear { gain }) => gain * x.ln(),
        }
    }

    /// Whether the kernel does not depend on time or state.
    pub fn is_constant(&self) -> bool {
        matches!(self, KernelSpec::Constant(_))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Constant(v) => write!(f, "const:{v}"),
            KernelSpec::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                write!(f, "pw:")?;
                for (i, (t, v)) in breakpoints.iter().zip(values).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}:{v}")?;
                }
                Ok(())
            }
            KernelSpec::Feedback(FeedbackRule::Threshold {
                level,
                below,
                above,
            }) => {
                write!(f, "threshold:{level}:{below}:{above}")
            }
            KernelSpec::Feedback(FeedbackRule::LogLinear { gain }) => write!(f, "loglinear:{gain}"),
        }
    }
}

/// `count` piecewise-constant kernels with values uniform on `[-kappa, kappa]`,
/// switching at integer times `0, 1, .., pieces - 1`. Deterministic in `seed`.
pub fn random_piecewise_kernels(
    count: usize,
    pieces: usize,
    kappa: f64,
    seed: u64,
) -> Vec<KernelSpec> {
    // stream ids from the top of the range so they never collide with path streams
    let mut rng = PathRng::new(seed, u64::MAX);
    (0..count)
        .map(|_| {
            let breakpoints = (0..pieces.max(1)).map(|k| k as f64).collect();
            let values = (0..pieces.max(1))
                .map(|_| kappa * (2.0 * rng.open_uniform() - 1.0))
                .collect();
            KernelSpec::PiecewiseConstant {
                breakpoints,
                values,
            }
        })
        .collect()
}
