use super::Driver;
use crate::error::{Error, Result};

/// Depth cap of the exact engines (the path-dependent tree has `2^depth` leaves).
pub const MAX_DEPTH: usize = 22;

#[derive(Debug, Clone, PartialEq)]
enum Payoff {
    /// Indexed by the number of up moves.
    Markov(Vec<f64>),
    /// Indexed by the move pattern: bit `j` set means step `j` went up.
    Path(Vec<f64>),
}

/// Terminal payoff on the `+-sqrt(dt)` random walk after `depth` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeClaim {
    depth: usize,
    dt: f64,
    payoff: Payoff,
}

impl LatticeClaim {
    /// Claim depending only on the terminal walk position `B_T`.
    pub fn markov(depth: usize, dt: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_shape(depth, dt)?;
        let sd = dt.sqrt();
        let values = (0..=depth)
            .map(|up| f((2.0 * up as f64 - depth as f64) * sd))
            .collect();
        LatticeClaim::checked(depth, dt, Payoff::Markov(values))
    }

    /// Claim given by a function of the increments (`+1` or `-1` per step).
    pub fn path_dependent(depth: usize, dt: f64, f: impl Fn(&[i8]) -> f64) -> Result<Self> {
        check_shape(depth, dt)?;
        let mut moves = vec![0i8; depth];
        let values = (0..1usize << depth)
            .map(|pattern| {
                for (j, m) in moves.iter_mut().enumerate() {
                    *m = if pattern >> j & 1 == 1 { 1 } else { -1 };
                }
                f(&moves)
            })
            .collect();
        LatticeClaim::checked(depth, dt, Payoff::Path(values))
    }

    /// Claim from its `2^depth` terminal values, indexed by move pattern.
    pub fn from_pattern_values(depth: usize, dt: f64, values: Vec<f64>) -> Result<Self> {
        check_shape(depth, dt)?;
        if values.len() != 1usize << depth {
            return Err(Error::domain(
                "values",
                values.len() as f64,
                "2^depth terminal values",
            ));
        }
        LatticeClaim::checked(depth, dt, Payoff::Path(values))
    }

    fn checked(depth: usize, dt: f64, payoff: Payoff) -> Result<Self> {
        let vals = match &payoff {
            Payoff::Markov(v) | Payoff::Path(v) => v,
        };
        if let Some(bad) = vals.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain("payoff", *bad, "finite on every path"));
        }
        Ok(LatticeClaim { depth, dt, payoff })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn is_markov(&self) -> bool {
        matches!(self.payoff, Payoff::Markov(_))
    }

    /// Terminal values on the full tree, indexed by move pattern.
    pub fn pattern_values(&self) -> Vec<f64> {
        match &self.payoff {
            Payoff::Path(v) => v.clone(),
            Payoff::Markov(v) => (0..1usize << self.depth)
                .map(|p| v[p.count_ones() as usize])
                .collect(),
        }
    }

    /// Applies `f` to the terminal value on every path.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let payoff = match &self.payoff {
            Payoff::Markov(v) => Payoff::Markov(v.iter().map(|&x| f(x)).collect()),
            Payoff::Path(v) => Payoff::Path(v.iter().map(|&x| f(x)).collect()),
        };
        LatticeClaim::checked(self.depth, self.dt, payoff)
    }

    /// Pathwise combination `f(self, other)` of two claims on the same lattice.
    pub fn zip_with(&self, other: &LatticeClaim, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.depth != other.depth || self.dt != other.dt {
            return Err(Error::domain(
                "depth",
                other.depth as f64,
                "claims on the same lattice",
            ));
        }
        let payoff = match (&self.payoff, &other.payoff) {
            (Payoff::Markov(a), Payoff::Markov(b)) => {
                Payoff::Markov(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            }
            _ => Payoff::Path(
                self.pattern_values()
                    .into_iter()
                    .zip(other.pattern_values())
                    .map(|(x, y)| f(x, y))
                    .collect(),
            ),
        };
        LatticeClaim::checked(self.depth, self.dt, payoff)
    }
}

fn check_shape(depth: usize, dt: f64) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthExceeded {
            depth,
            cap: MAX_DEPTH,
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("dt", dt, "dt > 0"));
    }
    Ok(())
}

/// Runs `step(level, up, down)` backwards from the leaves to `level`.
fn backward(
    claim: &LatticeClaim,
    level: usize,
    step: impl Fn(usize, f64, f64) -> f64,
) -> Result<Vec<f64>> {
    if level > claim.depth {
        return Err(Error::domain("level", level as f64, "level <= depth"));
    }
    match &claim.payoff {
        Payoff::Markov(v) => {
            let mut vals = v.clone();
            for k in (level..claim.depth).rev() {
                for j in 0..=k {
                    vals[j] = step(k, vals[j + 1], vals[j]);
                }
                vals.truncate(k + 1);
            }
            Ok(vals)
        }
        Payoff::Path(v) => {
            let mut vals = v.clone();
            for k in (level..claim.depth).rev() {
                let half = 1usize << k;
                for p in 0..half {
                    vals[p] = step(k, vals[p | half], vals[p]);
                }
                vals.truncate(half);
            }
            Ok(vals)
        }
    }
}

fn check_tilt(bound: f64, dt: f64) -> Result<()> {
    let tilt = bound * dt.sqrt();
    if !(tilt < 1.0) {
        return Err(Error::domain("kappa*sqrt(dt)", tilt, "kappa*sqrt(dt) < 1"));
    }
    Ok(())
}

/// Node values of the g-expectation at `level`.
///
/// Markov claims return `level + 1` values indexed by the number of up moves;
/// path-dependent claims return `2^level` values indexed by move pattern.
pub fn conditional_values(claim: &LatticeClaim, driver: &Driver, level: usize) -> Result<Vec<f64>> {
    check_tilt(driver.lipschitz(), claim.dt)?;
    let dt = claim.dt;
    let sd = dt.sqrt();
    backward(claim, level, |k, up, down| {
        let z = (up - down) / (2.0 * sd);
        0.5 * (up + down) + driver.eval(k as f64 * dt, z) * dt
    })
}

/// g-expectation of `claim` at time zero.
pub fn g_expectation_lattice(claim: &LatticeClaim, driver: &Driver) -> Result<f64> {
    Ok(conditional_values(claim, driver, 0)?[0])
}

fn prior_dp(claim: &LatticeClaim, kappa: f64, m: usize, lower: bool) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::domain("kappa", kappa, "kappa >= 0"));
    }
    if m < 2 {
        return Err(Error::domain("m", m as f64, "m >= 2"));
    }
    check_tilt(kappa, claim.dt)?;
    let sd = claim.dt.sqrt();
    let ups: Vec<f64> = (0..m)
        .map(|j| {
            let theta = -kappa + 2.0 * kappa * j as f64 / (m - 1) as f64;
            0.5 * (1.0 + theta * sd)
        })
        .collect();
    let vals = backward(claim, 0, |_, up, down| {
        let mut best = if lower {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        for &p in &ups {
            let e = p * up + (1.0 - p) * down;
            best = if lower { best.min(e) } else { best.max(e) };
        }
        best
    })?;
    Ok(vals[0])
}

/// Minimal expectation over node-wise priors with kernel in
/// `{-kappa, -kappa + 2 kappa/(m-1), .., kappa}`, by dynamic programming.
pub fn brute_force_lower_expectation(claim: &LatticeClaim, kappa: f64, m: usize) -> Result<f64> {
    prior_dp(claim, kappa, m, true)
}

/// Maximal expectation over the same priors.
pub fn brute_force_upper_expectation(claim: &LatticeClaim, kappa: f64, m: usize) -> Result<f64> {
    prior_dp(claim, kappa, m, false)
}
