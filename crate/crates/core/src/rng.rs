//! Per-path random streams.
//!
//! Every path draws from its own ChaCha8 stream keyed by `(seed, path index)`.
//! ChaCha is counter based, so a path's draws do not depend on how paths are
//! scheduled across workers, and two experiments that share a seed see the
//! same normals path by path (common random numbers).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Random stream of one Monte Carlo path.
pub struct PathRng(ChaCha8Rng);

impl PathRng {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        PathRng(rng)
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Uniform on `(0, 1]`, safe to pass to `ln`.
    #[inline]
    pub fn open_uniform(&mut self) -> f64 {
        1.0 - self.0.random::<f64>()
    }

    /// Exponential time with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -self.open_uniform().ln() / rate
    }
}

/// Runs `f` for every path index and returns the results in index order.
///
/// Work is spread over the current rayon pool; the output order (and so any
/// sequential reduction over it) does not depend on the number of workers.
pub fn map_paths<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n_paths as u64).into_par_iter().map(f).collect()
}
