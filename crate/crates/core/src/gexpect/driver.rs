use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::PathRng;

type Rule = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// BSDE driver `g(t, z)` with a declared Lipschitz bound in `z`.
#[derive(Clone)]
pub struct Driver {
    rule: Rule,
    lipschitz: f64,
    concave: bool,
    zero_at_zero: bool,
}

impl fmt::Debug for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Driver")
            .field("lipschitz", &self.lipschitz)
            .field("concave", &self.concave)
            .field("zero_at_zero", &self.zero_at_zero)
            .finish_non_exhaustive()
    }
}

const SPOT_CHECKS: usize = 512;

impl Driver {
    /// Wraps `rule` after spot-checking the declared properties on random points.
    pub fn new(
        rule: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
        concave: bool,
        zero_at_zero: bool,
    ) -> Result<Self> {
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::domain("lipschitz", lipschitz, "finite and >= 0"));
        }
        let d = Driver {
            rule: Arc::new(rule),
            lipschitz,
            concave,
            zero_at_zero,
        };
        d.spot_check()?;
        Ok(d)
    }

    fn spot_check(&self) -> Result<()> {
        let mut rng = PathRng::new(0x9e37_79b9, 0);
        for _ in 0..SPOT_CHECKS {
            let t = 10.0 * rng.open_uniform();
            // mix of small and large arguments
            let scale = if rng.open_uniform() < 0.5 { 1.0 } else { 100.0 };
            let z1 = scale * (2.0 * rng.open_uniform() - 1.0);
            let z2 = scale * (2.0 * rng.open_uniform() - 1.0);
            let (g1, g2) = (self.eval(t, z1), self.eval(t, z2));
            if !(g1.is_finite() && g2.is_finite()) {
                return Err(Error::domain("driver", f64::NAN, "finite values"));
            }
            let tol = 1e-9 * (1.0 + g1.abs().max(g2.abs()));
            if (g1 - g2).abs() > self.lipschitz * (z1 - z2).abs() + tol {
                return Err(Error::domain(
                    "lipschitz",
                    self.lipschitz,
                    "a valid Lipschitz bound of the driver",
                ));
            }
            if self.concave && self.eval(t, 0.5 * (z1 + z2)) < 0.5 * (g1 + g2) - tol {
                return Err(Error::domain("driver", z1, "concave in z"));
            }
            if self.zero_at_zero && self.eval(t, 0.0).abs() > 1e-12 {
                return Err(Error::domain("driver", t, "g(t, 0) = 0"));
            }
        }
        Ok(())
    }

    /// `g(z) = -kappa |z|`: the lower expectation over all priors with kernel bounded by `kappa`.
    pub fn kappa_ignorance(kappa: f64) -> Result<Self> {
        Driver::new(move |_, z| -kappa * z.abs(), kappa, true, true)
    }

    /// `g(z) = kappa |z|`: the upper expectation over the same priors.
    pub fn kappa_optimism(kappa: f64) -> Result<Self> {
        Driver::new(move |_, z| kappa * z.abs(), kappa, false, true)
    }

    pub fn zero() -> Self {
        Driver {
            rule: Arc::new(|_, _| 0.0),
            lipschitz: 0.0,
            concave: true,
            zero_at_zero: true,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64, z: f64) -> f64 {
        (self.rule)(t, z)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_concave(&self) -> bool {
        self.concave
    }

    pub fn is_zero_at_zero(&self) -> bool {
        self.zero_at_zero
    }
}

/// Value of the convex dual `f(t, theta) = sup_z (g(t, z) - z theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualValue {
    Finite(f64),
    /// The objective keeps growing towards an end of the search grid.
    Unbounded,
}

/// Grid search for the convex dual of `driver` at `(t, theta)`.
///
/// `z_grid` must be sorted. The supremum is reported unbounded when it sits at an
/// end of the grid and the objective is still strictly increasing there.
pub fn convex_dual(driver: &Driver, t: f64, theta: f64, z_grid: &[f64]) -> DualValue {
    let vals: Vec<f64> = z_grid
        .iter()
        .map(|&z| driver.eval(t, z) - z * theta)
        .collect();
    let Some((i_best, &best)) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
    else {
        return DualValue::Finite(f64::NEG_INFINITY);
    };
    let n = vals.len();
    let tol = 1e-12 * (1.0 + best.abs());
    let rising_left = n > 1 && vals[0] > vals[1] + tol;
    let rising_right = n > 1 && vals[n - 1] > vals[n - 2] + tol;
    if (i_best == 0 && rising_left) || (i_best == n - 1 && rising_right) {
        return DualValue::Unbounded;
    }
    DualValue::Finite(best)
}
