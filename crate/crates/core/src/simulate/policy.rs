use super::{ShockPath, TimeGrid};

/// Capacity and cumulative investment at each grid node.
///
/// `investment[0]` is the lump sum paid at time zero (`I` starts from zero just
/// before it).
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPath {
    pub grid: TimeGrid,
    pub capacity: Vec<f64>,
    pub investment: Vec<f64>,
}

impl PolicyPath {
    /// Investment increments `dI_i`, including the initial jump.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        let prev = std::iter::once(0.0).chain(self.investment.iter().copied());
        self.investment.iter().zip(prev).map(|(i, p)| i - p)
    }
}

/// Minimal investment keeping capacity above the running supremum of the base
/// capacity `base`, for depreciation rate `delta` and initial capacity `c`.
pub fn track_base_capacity(base: &[f64], c: f64, delta: f64, grid: TimeGrid) -> PolicyPath {
    let mut capacity = Vec::with_capacity(base.len());
    let mut investment = Vec::with_capacity(base.len());
    let mut top = c;
    let (mut zeta, mut inv) = (0.0f64, 0.0);
    for (i, &l) in base.iter().enumerate() {
        let t = grid.time(i);
        let grow = (delta * t).exp();
        top = top.max(l * grow);
        let z = (top - c).max(0.0);
        inv += (z - zeta) / grow;
        zeta = z;
        capacity.push(top / grow);
        investment.push(inv);
    }
    PolicyPath {
        grid,
        capacity,
        investment,
    }
}

/// Optimal plan without depreciation: keep capacity at least `k` times the
/// running maximum of the shock observed at the nodes.
pub fn optimal_policy_path(shock: &ShockPath, k: f64, c: f64) -> PolicyPath {
    let mut capacity = Vec::with_capacity(shock.shock.len());
    let mut investment = Vec::with_capacity(shock.shock.len());
    let mut top = c;
    for &x in &shock.shock {
        top = top.max(k * x);
        capacity.push(top);
        investment.push(top - c);
    }
    PolicyPath {
        grid: shock.grid,
        capacity,
        investment,
    }
}

/// Same plan driven by the continuously monitored running maximum, i.e. the
/// policy of the continuous-time problem observed at the nodes.
pub fn optimal_policy_path_continuous(shock: &ShockPath, k: f64, c: f64) -> PolicyPath {
    let capacity: Vec<f64> = shock.running_max.iter().map(|&m| c.max(k * m)).collect();
    let investment = capacity.iter().map(|&cap| cap - c).collect();
    PolicyPath {
        grid: shock.grid,
        capacity,
        investment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reversible_capacity, ModelParams};
    use crate::rng::PathRng;
    use crate::simulate::{sample_shock_path, KernelSpec};

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(n as f64, n).unwrap()
    }

    fn assert_eq_eps(a: &[f64], b: &[f64], eps: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= eps, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn running_supremum_without_depreciation() {
        let p = track_base_capacity(&[3.0, 7.0, 6.0], 5.0, 0.0, grid(2));
        assert_eq_eps(&p.capacity, &[5.0, 7.0, 7.0], 1e-15);
        assert_eq_eps(&p.investment, &[0.0, 2.0, 2.0], 1e-15);
    }

    #[test]
    fn depreciating_capacity() {
        let p = track_base_capacity(&[0.4, 0.6], 1.0, 2f64.ln(), grid(1));
        assert!((p.capacity[1] - 0.6).abs() < 1e-15);
        assert_eq!(p.investment[0], 0.0);
        // C_1 = e^{-delta}(c + e^{delta} dI_1)
        assert!((p.capacity[1] - 0.5 * (1.0 + 2.0 * p.investment[1])).abs() < 1e-15);
    }

    #[test]
    fn zero_base_never_invests() {
        let delta = 0.3;
        let p = track_base_capacity(&[0.0; 6], 2.0, delta, grid(5));
        assert!(p.investment.iter().all(|&i| i == 0.0));
        for (i, &cap) in p.capacity.iter().enumerate() {
            assert!((cap - 2.0 * (-delta * i as f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn variation_of_constants_holds() {
        let base = [0.5, 2.0, 1.0, 3.5, 3.0, 4.0];
        let delta = 0.2;
        let g = grid(5);
        let p = track_base_capacity(&base, 1.0, delta, g);
        let mut acc = 1.0;
        for (i, d) in p.increments().enumerate() {
            let t = g.time(i);
            acc += (delta * t).exp() * d;
            assert!((p.capacity[i] - (-delta * t).exp() * acc).abs() <= 1e-10);
            assert!(d >= 0.0);
        }
    }

    fn sample(seed: u64) -> ShockPath {
        let p = ModelParams::reference();
        sample_shock_path(
            &p,
            &KernelSpec::Constant(-0.1),
            TimeGrid::new(10.0, 120).unwrap(),
            &mut PathRng::new(seed, 0),
        )
        .unwrap()
    }

    #[test]
    fn optimal_policy_is_a_tracking_policy() {
        for seed in 0..20 {
            let path = sample(seed);
            let k = 61.1;
            for &c in &[0.0, 30.0, 80.0] {
                let opt = optimal_policy_path(&path, k, c);
                let base: Vec<f64> = path.shock.iter().map(|x| k * x).collect();
                let track = track_base_capacity(&base, c, 0.0, path.grid);
                assert_eq_eps(&opt.capacity, &track.capacity, 1e-12);
                assert_eq_eps(&opt.investment, &track.investment, 1e-12);
                // flat-off: capacity only grows where it equals the base capacity
                let flat: f64 = opt
                    .increments()
                    .zip(opt.capacity.iter().zip(&base))
                    .map(|(d, (cap, b))| (cap - b) * d)
                    .sum();
                assert!(flat.abs() <= 1e-10);
                for (d, (cap, b)) in opt.increments().zip(opt.capacity.iter().zip(&base)) {
                    if d > 0.0 {
                        assert!((cap - b).abs() <= 1e-12 * cap);
                    }
                }
            }
        }
    }

    #[test]
    fn initial_jump_and_large_capacity() {
        let path = sample(1);
        let k = 61.1;
        let opt = optimal_policy_path(&path, k, 0.0);
        assert!((opt.investment[0] - k * path.shock[0]).abs() < 1e-12);
        let big = k * path.shock.iter().cloned().fold(0.0, f64::max);
        let idle = optimal_policy_path(&path, k, big);
        assert!(idle.investment.iter().all(|&i| i == 0.0));
    }

    #[test]
    fn capacity_below_reversible_benchmark() {
        let p = ModelParams::reference();
        let k = 61.118326714706285;
        for seed in 0..20 {
            let path = sample(seed);
            for &c in &[0.0, 50.0] {
                let opt = optimal_policy_path(&path, k, c);
                let mut top = 0.0f64;
                for (cap, x) in opt.capacity.iter().zip(&path.shock) {
                    top = top.max(reversible_capacity(*x, p.r, 0.0, p.alpha).unwrap());
                    assert!(*cap <= c + top);
                }
            }
        }
    }

    #[test]
    fn continuous_policy_dominates_discrete() {
        let path = sample(4);
        let d = optimal_policy_path(&path, 61.1, 10.0);
        let c = optimal_policy_path_continuous(&path, 61.1, 10.0);
        for (a, b) in d.capacity.iter().zip(&c.capacity) {
            assert!(b >= a);
        }
    }
}
