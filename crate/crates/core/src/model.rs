//! Model parameters, the Cobb-Douglas profit function and the
//! perfect-reversibility benchmark.
//!
//! The shock is a geometric Brownian motion `X_t = x exp((b - sigma^2/2) t + sigma B_t)`,
//! capacity depreciates at rate `delta` and profits are discounted at `r`.
//! Ambiguity is `kappa`-ignorance: every prior whose Girsanov kernel is
//! bounded by `kappa` is considered.

use crate::error::{Error, Result};

/// Raw scalar inputs of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Initial shock level.
    pub x: f64,
    /// Initial capacity.
    pub c: f64,
    /// Shock drift.
    pub b: f64,
    /// Shock volatility.
    pub sigma: f64,
    /// Ambiguity radius.
    pub kappa: f64,
    /// Discount rate.
    pub r: f64,
    /// Profit elasticity with respect to the shock.
    pub alpha: f64,
    /// Depreciation rate.
    pub delta: f64,
}

impl ModelParams {
    /// The reference setting used throughout the tests:
    /// `x = 1, c = 0, b = 0.02, sigma = 0.2, kappa = 0.1, r = 0.1, alpha = 0.5, delta = 0`.
    pub fn reference() -> Self {
        ModelParams {
            x: 1.0,
            c: 0.0,
            b: 0.02,
            sigma: 0.2,
            kappa: 0.1,
            r: 0.1,
            alpha: 0.5,
            delta: 0.0,
        }
    }

    /// Right-hand side of the explicit-solution condition on `r`.
    pub fn ambiguity_threshold(&self) -> f64 {
        let s = self.sigma + self.kappa;
        self.b + self.sigma * self.kappa + 0.5 * s * s
    }

    /// Checks every bound and computes the explicit-solution flag.
    pub fn validate(self) -> Result<ValidParams> {
        let checks: [(&'static str, f64, bool, &'static str); 8] = [
            ("x", self.x, self.x > 0.0, "x > 0"),
            ("c", self.c, self.c >= 0.0, "c >= 0"),
            ("b", self.b, true, "finite"),
            ("sigma", self.sigma, self.sigma > 0.0, "sigma > 0"),
            ("kappa", self.kappa, self.kappa >= 0.0, "kappa >= 0"),
            ("r", self.r, self.r > 0.0, "r > 0"),
            (
                "alpha",
                self.alpha,
                self.alpha > 0.0 && self.alpha < 1.0,
                "alpha in (0,1)",
            ),
            ("delta", self.delta, self.delta >= 0.0, "delta >= 0"),
        ];
        for (name, value, ok, bound) in checks {
            if !value.is_finite() {
                return Err(Error::domain(name, value, "a finite number"));
            }
            if !ok {
                return Err(Error::domain(name, value, bound));
            }
        }
        let explicit = self.r > self.ambiguity_threshold() && self.delta == 0.0;
        Ok(ValidParams {
            params: self,
            explicit,
        })
    }
}

/// Parameters that passed [`ModelParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidParams {
    params: ModelParams,
    explicit: bool,
}

impl ValidParams {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Whether the closed-form solution applies to these parameters.
    pub fn explicit_solution(&self) -> bool {
        self.explicit
    }

    /// Fails unless the closed-form pipeline may be used.
    pub fn require_explicit(&self) -> Result<()> {
        if self.explicit {
            return Ok(());
        }
        if self.params.delta != 0.0 {
            return Err(Error::AssumptionViolated(format!(
                "explicit solution requires delta = 0, got {}",
                self.params.delta
            )));
        }
        Err(Error::AmbiguityTooLarge {
            r: self.params.r,
            threshold: self.params.ambiguity_threshold(),
        })
    }

    /// Copy with a different initial state `(x, c)`, revalidated.
    pub fn with_state(&self, x: f64, c: f64) -> Result<ValidParams> {
        ModelParams {
            x,
            c,
            ..self.params
        }
        .validate()
    }
}

impl std::ops::Deref for ValidParams {
    type Target = ModelParams;

    fn deref(&self) -> &ModelParams {
        &self.params
    }
}

/// Cobb-Douglas profit rate `x^alpha c^(1-alpha) / (1-alpha)`; exactly zero at `c = 0`.
pub fn profit(x: f64, c: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "x > 0"));
    }
    if !(c >= 0.0) {
        return Err(Error::domain("c", c, "c >= 0"));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    Ok(profit_unchecked(x, c, alpha))
}

#[inline]
pub(crate) fn profit_unchecked(x: f64, c: f64, alpha: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        x.powf(alpha) * c.powf(1.0 - alpha) / (1.0 - alpha)
    }
}

/// Marginal profit `(x/c)^alpha`. Errors at `c = 0` instead of returning infinity.
pub fn marginal_profit(x: f64, c: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "x > 0"));
    }
    if !(c > 0.0) {
        return Err(Error::domain("c", c, "c > 0"));
    }
    Ok((x / c).powf(alpha))
}

/// Capacity that would be optimal if investment were reversible:
/// the root of `(x/c)^alpha = r + delta`.
pub fn reversible_capacity(x: f64, r: f64, delta: f64, alpha: f64) -> Result<f64> {
    let rate = check_reversible_inputs(x, r, delta, alpha)?;
    Ok(x * rate.powf(-1.0 / alpha))
}

/// `sup_c { profit(x, c) - (r + delta) c }`, attained at [`reversible_capacity`].
pub fn pi_star(x: f64, r: f64, delta: f64, alpha: f64) -> Result<f64> {
    let rate = check_reversible_inputs(x, r, delta, alpha)?;
    Ok(x * rate.powf((alpha - 1.0) / alpha) * alpha / (1.0 - alpha))
}

fn check_reversible_inputs(x: f64, r: f64, delta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "x > 0"));
    }
    if !(delta >= 0.0) {
        return Err(Error::domain("delta", delta, "delta >= 0"));
    }
    let rate = r + delta;
    if !(rate > 0.0) {
        return Err(Error::domain("r + delta", rate, "r + delta > 0"));
    }
    Ok(rate)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("alpha", alpha, "alpha in (0,1)"))
    }
}
