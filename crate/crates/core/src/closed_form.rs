//! Closed-form solution of the irreversible investment problem under
//! `kappa`-ignorance with a geometric Brownian shock.
//!
//! Under the worst-case prior the log-shock `Y_t = ln(X_t / x)` is a Brownian
//! motion with drift `nu = b - sigma^2/2 - sigma*kappa`, whose Laplace exponent is
//! `phi(l) = sigma^2 l^2 / 2 + nu l`. The optimal base capacity is `K X_t`, and
//! every other quantity here follows from the roots of `phi(l) = r`.

use crate::error::{Error, Result};
use crate::model::{ModelParams, ValidParams};

/// `phi(l) = sigma^2 l^2 / 2 + (b - sigma^2/2 - sigma*kappa) l`.
pub fn laplace_exponent(lam: f64, p: &ModelParams) -> f64 {
    0.5 * p.sigma * p.sigma * lam * lam + worst_case_log_drift(p) * lam
}

/// Laplace exponent after the exponential tilt by `alpha`: `phi(l + alpha) - phi(alpha)`.
pub fn tilted_exponent(lam: f64, p: &ModelParams) -> f64 {
    laplace_exponent(lam + p.alpha, p) - laplace_exponent(p.alpha, p)
}

/// Log-shock drift under the worst-case prior.
pub fn worst_case_log_drift(p: &ModelParams) -> f64 {
    p.b - 0.5 * p.sigma * p.sigma - p.sigma * p.kappa
}

/// Roots `(negative, positive)` of `a q^2 + m q - r = 0` with `a, r > 0`.
///
/// The larger-magnitude root is formed first and the other recovered from the
/// product `-r/a`, so neither suffers cancellation.
fn quadratic_roots(a: f64, m: f64, r: f64) -> (f64, f64) {
    let disc = (m * m + 4.0 * a * r).sqrt();
    if m > 0.0 {
        let neg = (-m - disc) / (2.0 * a);
        (neg, -r / (a * neg))
    } else {
        let pos = (-m + disc) / (2.0 * a);
        (-r / (a * pos), pos)
    }
}

/// Derived constants of the explicit solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionConstants {
    /// Largest root of `phi(l) = r`.
    pub lambda: f64,
    /// `lambda - alpha`.
    pub mu: f64,
    /// `r - phi(alpha)`.
    pub r_tilde: f64,
    /// `sigma^2` times the negative root of `phi(l) = r`.
    pub beta_minus: f64,
    /// Largest root of `sigma^2 q^2 / 2 + (b - sigma^2/2 + sigma*kappa) q - r = 0`.
    pub beta_plus: f64,
    /// Base-capacity multiplier.
    pub k: f64,
    /// `k^alpha`.
    pub k_alpha: f64,
}

impl SolutionConstants {
    pub fn solve(params: &ValidParams) -> Result<Self> {
        params.require_explicit()?;
        let p: &ModelParams = params;
        let half_s2 = 0.5 * p.sigma * p.sigma;
        let (neg, lambda) = quadratic_roots(half_s2, worst_case_log_drift(p), p.r);
        let beta_minus = p.sigma * p.sigma * neg;
        let (_, beta_plus) = quadratic_roots(half_s2, p.b - half_s2 + p.sigma * p.kappa, p.r);
        let r_tilde = p.r - laplace_exponent(p.alpha, p);
        let k_alpha = beta_minus / (beta_minus - p.alpha * p.sigma * p.sigma) / p.r;
        let k = k_alpha.powf(1.0 / p.alpha);

        if !(lambda > 1.0) {
            return Err(Error::AssumptionViolated(format!(
                "largest root lambda = {lambda} of phi(l) = r must exceed 1"
            )));
        }
        if !(r_tilde > 0.0) {
            return Err(Error::AssumptionViolated(format!(
                "r - phi(alpha) = {r_tilde} must be positive"
            )));
        }
        if !(beta_plus > 1.0) {
            return Err(Error::AssumptionViolated(format!(
                "beta_plus = {beta_plus} must exceed 1"
            )));
        }
        Ok(SolutionConstants {
            lambda,
            mu: lambda - p.alpha,
            r_tilde,
            beta_minus,
            beta_plus,
            k,
            k_alpha,
        })
    }

    /// Same constants with the multiplier replaced by `k`; the value formula then
    /// prices the (generally suboptimal) policy that tracks `k X`.
    pub fn with_multiplier(&self, k: f64, alpha: f64) -> Self {
        SolutionConstants {
            k,
            k_alpha: k.powf(alpha),
            ..*self
        }
    }

    /// Bound on the discounted investment cost of the optimal plan under any
    /// admissible prior, per unit of initial shock: `K beta_plus / (beta_plus - 1)`.
    pub fn admissibility_bound(&self, x: f64) -> f64 {
        self.k * x * self.beta_plus / (self.beta_plus - 1.0)
    }
}

/// Value of the optimal plan started from shock `x` and capacity `c`.
///
/// Below the boundary `c <= K x` the firm jumps to `K x` at cost `K x - c`.
pub fn value_function(x: f64, c: f64, p: &ModelParams, k: &SolutionConstants) -> Result<f64> {
    check_state(x, c)?;
    let boundary = k.k * x;
    if c <= boundary {
        Ok(c - boundary + value_above(x, boundary, p, k))
    } else {
        Ok(value_above(x, c, p, k))
    }
}

fn value_above(x: f64, c: f64, p: &ModelParams, k: &SolutionConstants) -> f64 {
    let a = p.alpha;
    let never_invest = x.powf(a) * c.powf(1.0 - a) / ((1.0 - a) * k.r_tilde);
    never_invest + expansion_value(x, c, p, k)
}

/// Part of the value above the boundary contributed by future investment.
pub fn expansion_value(x: f64, c: f64, _p: &ModelParams, k: &SolutionConstants) -> f64 {
    let lam = k.lambda;
    x.powf(lam) * c.powf(1.0 - lam) * k.k.powf(k.mu) * (1.0 / k.r_tilde - k.k_alpha) / (lam - 1.0)
}

/// `dv/dc`: one below the boundary, the derivative of the upper branch above it.
pub fn value_function_dc(x: f64, c: f64, p: &ModelParams, k: &SolutionConstants) -> Result<f64> {
    check_state(x, c)?;
    if !(c > 0.0) {
        return Err(Error::domain("c", c, "c > 0"));
    }
    if c < k.k * x {
        return Ok(1.0);
    }
    let a = p.alpha;
    let lam = k.lambda;
    Ok(x.powf(a) * c.powf(-a) / k.r_tilde
        - x.powf(lam) * c.powf(-lam) * k.k.powf(k.mu) * (1.0 / k.r_tilde - k.k_alpha))
}

fn check_state(x: f64, c: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::domain("x", x, "x > 0"));
    }
    if !(c >= 0.0) {
        return Err(Error::domain("c", c, "c >= 0"));
    }
    Ok(())
}

/// `E[max(L, exp(a Z))]` for `Z ~ Exp(nu)`: `L + a/(nu - a) L^((a - nu)/a)`
/// when `a > 0`, and `L` when `a <= 0` (then `exp(a Z) <= 1 <= L`).
pub fn expected_max_exp(l: f64, a: f64, nu: f64) -> Result<f64> {
    if !(l >= 1.0) {
        return Err(Error::domain("L", l, "L >= 1"));
    }
    if !(nu > 0.0) {
        return Err(Error::domain("nu", nu, "nu > 0"));
    }
    if a <= 0.0 {
        return Ok(l);
    }
    if !(a < nu) {
        return Err(Error::domain(
            "a",
            a,
            "a < nu (expectation diverges otherwise)",
        ));
    }
    Ok(l + a / (nu - a) * l.powf((a - nu) / a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p0() -> ValidParams {
        ModelParams::reference().validate().unwrap()
    }

    /// Largest root of `phi(l) = r` by bisection.
    fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn laplace_exponent_values() {
        let p = p0();
        assert_eq!(laplace_exponent(0.0, &p), 0.0);
        assert!(laplace_exponent(1.0, &p).abs() < 1e-16);
        let (lam, h) = (1.3, 1e-6);
        let fd = laplace_exponent(lam, &p) - laplace_exponent(lam - h, &p);
        let slope = p.sigma * p.sigma * lam + worst_case_log_drift(&p);
        assert!((fd - h * slope).abs() < 1e-12);
    }

    #[test]
    fn tilted_exponent_values() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        assert_eq!(tilted_exponent(0.0, &p), 0.0);
        assert_relative_eq!(tilted_exponent(k.mu, &p), k.r_tilde, max_relative = 1e-12);
        assert_relative_eq!(
            tilted_exponent(1.0 - p.alpha, &p),
            laplace_exponent(1.0, &p) - laplace_exponent(p.alpha, &p),
            epsilon = 1e-15
        );
    }

    #[test]
    fn reference_constants_against_bisection() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        let lam = bisect_root(|l| laplace_exponent(l, &p) - p.r, 0.0, 100.0);
        let neg = bisect_root(|l| laplace_exponent(l, &p) - p.r, -100.0, 0.0);
        let nu_plus = p.b - 0.5 * p.sigma * p.sigma + p.sigma * p.kappa;
        let bp = bisect_root(
            |q| 0.5 * p.sigma * p.sigma * q * q + nu_plus * q - p.r,
            0.0,
            100.0,
        );
        assert_relative_eq!(k.lambda, lam, max_relative = 1e-12);
        assert_relative_eq!(k.beta_minus, p.sigma * p.sigma * neg, max_relative = 1e-12);
        assert_relative_eq!(k.beta_plus, bp, max_relative = 1e-12);
        // frozen from the bisection oracle
        assert_relative_eq!(k.lambda, 2.79128784747792, max_relative = 1e-12);
        assert_relative_eq!(k.beta_minus, -0.07165151389911681, max_relative = 1e-12);
        assert_relative_eq!(k.beta_plus, 1.79128784747792, max_relative = 1e-12);
        assert_relative_eq!(k.r_tilde, 0.105, max_relative = 1e-12);
        assert_relative_eq!(k.mu, 2.29128784747792, max_relative = 1e-12);
        assert_relative_eq!(k.k_alpha, 7.817821097640076, max_relative = 1e-12);
        assert_relative_eq!(k.k, 61.118326714706285, max_relative = 1e-12);
    }

    #[test]
    fn constant_identities() {
        for &(b, sigma, kappa, r, alpha) in &[
            (0.02, 0.2, 0.1, 0.1, 0.5),
            (0.0, 0.3, 0.0, 0.2, 0.3),
            (0.05, 0.1, 0.05, 0.2, 0.8),
            (-0.03, 0.25, 0.2, 0.15, 0.6),
        ] {
            let p = ModelParams {
                b,
                sigma,
                kappa,
                r,
                alpha,
                ..ModelParams::reference()
            }
            .validate()
            .unwrap();
            let k = SolutionConstants::solve(&p).unwrap();
            assert!((laplace_exponent(k.lambda, &p) - r).abs() <= 1e-10);
            // product of roots: beta_minus = -2r / lambda
            assert_relative_eq!(k.beta_minus, -2.0 * r / k.lambda, max_relative = 1e-10);
            // equivalent restatement of the multiplier
            assert_relative_eq!(
                k.k_alpha,
                1.0 / (r + 0.5 * alpha * sigma * sigma * k.lambda),
                max_relative = 1e-10
            );
            // the multiplier maximises the value formula: K^alpha = mu / (lambda r_tilde)
            assert_relative_eq!(
                k.k_alpha,
                k.mu / (k.lambda * k.r_tilde),
                max_relative = 1e-10
            );
            assert!(k.k_alpha <= 1.0 / r);
            assert!(k.lambda > 1.0 && k.r_tilde > 0.0 && k.beta_plus > 1.0);
        }
    }

    #[test]
    fn rejects_non_explicit_parameters() {
        let p = ModelParams {
            r: 0.08,
            ..ModelParams::reference()
        }
        .validate()
        .unwrap();
        assert!(matches!(
            SolutionConstants::solve(&p),
            Err(Error::AmbiguityTooLarge { .. })
        ));
    }

    #[test]
    fn unambiguous_multiplier_is_larger() {
        let k_amb = SolutionConstants::solve(&p0()).unwrap().k;
        let p = ModelParams {
            kappa: 0.0,
            ..ModelParams::reference()
        }
        .validate()
        .unwrap();
        assert!(SolutionConstants::solve(&p).unwrap().k > k_amb);
    }

    #[test]
    fn reference_values() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        // direct evaluation of the two-branch formula
        assert_relative_eq!(
            value_function(1.0, 0.0, &p, &k).unwrap(),
            95.23809523809521,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            value_function(1.0, 100.0, &p, &k).unwrap(),
            193.55844114818456,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            value_function(1.0, k.k, &p, &k).unwrap(),
            156.3564219528015,
            max_relative = 1e-12
        );
        assert!(value_function(0.0, 1.0, &p, &k).is_err());
        assert!(value_function(1.0, -1.0, &p, &k).is_err());
    }

    #[test]
    fn jump_region_is_linear_in_capacity() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        let v0 = value_function(1.0, 0.0, &p, &k).unwrap();
        let v1 = value_function(1.0, 10.0, &p, &k).unwrap();
        assert_relative_eq!(v1 - v0, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn smooth_fit_and_derivative() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        for &x in &[0.1, 1.0, 3.7] {
            let b = k.k * x;
            assert!((value_function_dc(x, b, &p, &k).unwrap() - 1.0).abs() <= 1e-10);
            let d2 = value_function_dc(x, 2.0 * b, &p, &k).unwrap();
            assert!(d2 > 0.0 && d2 < 1.0);
            let h = 1e-7 * b;
            let lo = value_function(x, b - h, &p, &k).unwrap();
            let hi = value_function(x, b + h, &p, &k).unwrap();
            let mid = value_function(x, b, &p, &k).unwrap();
            assert!((hi - mid).abs() <= 1e-9 * mid.abs().max(1.0) + 2.0 * h);
            assert!((mid - lo).abs() <= 1e-9 * mid.abs().max(1.0) + 2.0 * h);
        }
        assert_eq!(value_function_dc(1.0, 0.5 * k.k, &p, &k).unwrap(), 1.0);
        assert!(value_function_dc(1.0, 0.0, &p, &k).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        for &x in &[0.3, 1.0, 2.5] {
            for &m in &[1.02, 1.5, 3.0, 10.0] {
                let c = m * k.k * x;
                let h = 1e-5 * c;
                let fd = (value_function(x, c + h, &p, &k).unwrap()
                    - value_function(x, c - h, &p, &k).unwrap())
                    / (2.0 * h);
                let exact = value_function_dc(x, c, &p, &k).unwrap();
                assert!(
                    ((fd - exact) / exact).abs() <= 1e-6,
                    "x={x} m={m}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn expansion_value_is_positive_and_vanishes() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        let mut prev = f64::INFINITY;
        for &m in &[1.01, 2.0, 10.0, 100.0, 1e4] {
            let e = expansion_value(1.0, m * k.k, &p, &k);
            assert!(e > 0.0 && e < prev);
            prev = e;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn optimal_multiplier_beats_perturbed_ones() {
        let p = p0();
        let k = SolutionConstants::solve(&p).unwrap();
        let best = value_function(1.0, 0.0, &p, &k).unwrap();
        for &s in &[0.5, 0.9, 1.1, 2.0] {
            let other = k.with_multiplier(s * k.k, p.alpha);
            assert!(value_function(1.0, 0.0, &p, &other).unwrap() < best);
        }
    }

    #[test]
    fn expected_max_exp_values() {
        assert_relative_eq!(expected_max_exp(1.0, 1.0, 2.0).unwrap(), 2.0);
        assert_relative_eq!(
            expected_max_exp(4.0, 1.0, 2.0).unwrap(),
            4.25,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            expected_max_exp(10.0, 0.5, 3.0).unwrap(),
            10.0 + 0.2e-5,
            max_relative = 1e-14
        );
        assert!(expected_max_exp(1.0, 2.0, 2.0).is_err());
        assert!(expected_max_exp(0.5, 1.0, 2.0).is_err());
        assert!(expected_max_exp(1.0, -1.0, 0.0).is_err());
        assert_eq!(expected_max_exp(3.0, -0.5, 1.0).unwrap(), 3.0);
        assert_eq!(expected_max_exp(3.0, 0.0, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn expected_max_exp_against_quadrature() {
        // integrate max(L, e^{az}) nu e^{-nu z} on [0, z_max] with composite Simpson
        let quad = |l: f64, a: f64, nu: f64| {
            let f = |z: f64| l.max((a * z).exp()) * nu * (-nu * z).exp();
            let simpson = |lo: f64, hi: f64, m: usize| {
                let h = (hi - lo) / m as f64;
                let mut s = f(lo) + f(hi);
                for i in 1..m {
                    s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
                }
                s * h / 3.0
            };
            // split at the kink so each piece is smooth
            let kink = l.ln() / a;
            simpson(0.0, kink, 20_000) + simpson(kink, kink + 60.0 / (nu - a), 200_000)
        };
        assert_relative_eq!(quad(4.0, 1.0, 2.0), 4.25, max_relative = 1e-9);
        assert_relative_eq!(
            quad(10.0, 0.5, 3.0),
            expected_max_exp(10.0, 0.5, 3.0).unwrap(),
            max_relative = 1e-9
        );
    }
}
