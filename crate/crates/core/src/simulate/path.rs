use super::{KernelSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::PathRng;

/// Maximum of a Brownian bridge from `a` to `b` over a step of variance `var`,
/// given `u` uniform on `(0, 1]`.
#[inline]
fn bridge_max(a: f64, b: f64, var: f64, u: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b + (d * d - 2.0 * var * u.ln()).sqrt())
}

/// Incremental simulator of the log-shock under a kernel.
///
/// Each step consumes one normal (the increment) and one uniform (the bridge
/// maximum inside the step), in that order.
pub(crate) struct Stepper<'a> {
    base_drift: f64,
    sigma: f64,
    kappa: f64,
    kernel: &'a KernelSpec,
    checked: bool,
    pub t: f64,
    pub log_x: f64,
    /// Log of the continuously monitored running maximum of the shock.
    pub log_max: f64,
    /// Log of the density of the simulated prior with respect to the reference prior.
    pub log_density: f64,
    /// Kernel value in force on the next step.
    pub xi: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(p: &ModelParams, kernel: &'a KernelSpec) -> Result<Self> {
        Self::build(p, kernel, true)
    }

    /// Stepper whose kernel may exceed `kappa`; used for auxiliary tilted measures.
    pub fn unchecked(p: &ModelParams, kernel: &'a KernelSpec) -> Result<Self> {
        Self::build(p, kernel, false)
    }

    fn build(p: &ModelParams, kernel: &'a KernelSpec, checked: bool) -> Result<Self> {
        let log_x = p.x.ln();
        let mut s = Stepper {
            base_drift: p.b - 0.5 * p.sigma * p.sigma,
            sigma: p.sigma,
            kappa: p.kappa,
            kernel,
            checked,
            t: 0.0,
            log_x,
            log_max: log_x,
            log_density: 0.0,
            xi: 0.0,
        };
        s.xi = s.kernel_at(0.0, p.x)?;
        Ok(s)
    }

    fn kernel_at(&self, t: f64, x: f64) -> Result<f64> {
        if self.checked {
            self.kernel.value(t, x, self.kappa)
        } else {
            Ok(self.kernel.raw_value(t, x))
        }
    }

    #[inline]
    pub fn advance_with(&mut self, h: f64, z: f64, u: f64) -> Result<()> {
        let sd = h.sqrt();
        let inc = (self.base_drift + self.sigma * self.xi) * h + self.sigma * sd * z;
        let next = self.log_x + inc;
        let top = bridge_max(self.log_x, next, self.sigma * self.sigma * h, u);
        if top > self.log_max {
            self.log_max = top;
        }
        self.log_density += self.xi * sd * z + 0.5 * self.xi * self.xi * h;
        self.log_x = next;
        self.t += h;
        if !self.kernel.is_constant() {
            self.xi = self.kernel_at(self.t, next.exp())?;
        }
        Ok(())
    }

    /// Advances by `h`, returning the normal drawn for the step.
    #[inline]
    pub fn advance(&mut self, h: f64, rng: &mut PathRng) -> Result<f64> {
        let z = rng.normal();
        let u = rng.open_uniform();
        self.advance_with(h, z, u)?;
        Ok(z)
    }

    /// Steps of length `step` up to time `tau`, the last one shortened to land on it.
    pub fn run_until(&mut self, tau: f64, step: f64, rng: &mut PathRng) -> Result<()> {
        loop {
            let left = tau - self.t;
            if left <= 1e-12 * step {
                return Ok(());
            }
            let h = if left < step * (1.0 + 1e-9) {
                left
            } else {
                step
            };
            self.advance(h, rng)?;
        }
    }

    pub fn shock(&self) -> f64 {
        self.log_x.exp()
    }

    pub fn running_max(&self) -> f64 {
        self.log_max.exp()
    }
}

/// A simulated shock trajectory under a chosen prior.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockPath {
    pub grid: TimeGrid,
    /// Shock level at each node.
    pub shock: Vec<f64>,
    /// Kernel value in force at each node.
    pub kernel: Vec<f64>,
    /// Density of the simulated prior with respect to the reference prior at each node.
    pub density: Vec<f64>,
    /// Standard normal driving step `i -> i+1`, one per step.
    pub normals: Vec<f64>,
    /// Continuously monitored running maximum of the shock at each node.
    pub running_max: Vec<f64>,
}

/// Simulates a path directly under the prior selected by `kernel`.
pub fn sample_shock_path(
    params: &ModelParams,
    kernel: &KernelSpec,
    grid: TimeGrid,
    rng: &mut PathRng,
) -> Result<ShockPath> {
    let n = grid.n_nodes();
    let mut path = ShockPath {
        grid,
        shock: Vec::with_capacity(n),
        kernel: Vec::with_capacity(n),
        density: Vec::with_capacity(n),
        normals: Vec::with_capacity(n - 1),
        running_max: Vec::with_capacity(n),
    };
    let mut s = Stepper::new(params, kernel)?;
    let h = grid.dt();
    path.push(&s);
    for _ in 0..grid.n_steps() {
        let z = s.advance(h, rng)?;
        path.normals.push(z);
        path.push(&s);
    }
    Ok(path)
}

impl ShockPath {
    fn push(&mut self, s: &Stepper<'_>) {
        self.shock.push(s.shock());
        self.kernel.push(s.xi);
        self.density.push(s.log_density.exp());
        self.running_max.push(s.running_max());
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.times()
    }

    /// Path on the grid with half the step, obtained by inserting Brownian-bridge
    /// midpoints. The coarse nodes are kept unchanged.
    ///
    /// The bridge ignores drift, so the refinement has the law of a freshly
    /// simulated fine path whenever the kernel is constant on each coarse step.
    pub fn refine(&self, params: &ModelParams, rng: &mut PathRng) -> Result<ShockPath> {
        let fine = TimeGrid::new(self.grid.horizon(), 2 * self.grid.n_steps())?;
        let h = fine.dt();
        let var = params.sigma * params.sigma * h;
        let base = params.b - 0.5 * params.sigma * params.sigma;
        let mut out = ShockPath {
            grid: fine,
            shock: Vec::with_capacity(fine.n_nodes()),
            kernel: Vec::with_capacity(fine.n_nodes()),
            density: Vec::with_capacity(fine.n_nodes()),
            normals: Vec::with_capacity(fine.n_steps()),
            running_max: Vec::with_capacity(fine.n_nodes()),
        };
        let mut log_max = self.shock[0].ln();
        let mut log_density = 0.0;
        out.shock.push(self.shock[0]);
        out.kernel.push(self.kernel[0]);
        out.density.push(1.0);
        out.running_max.push(self.shock[0]);
        for i in 0..self.grid.n_steps() {
            let (a, b) = (self.shock[i].ln(), self.shock[i + 1].ln());
            let xi = self.kernel[i];
            let mid = 0.5 * (a + b) + 0.5 * var.sqrt() * rng.normal();
            for (lo, hi) in [(a, mid), (mid, b)] {
                let z = ((hi - lo) - (base + params.sigma * xi) * h) / (params.sigma * h.sqrt());
                log_max = log_max.max(bridge_max(lo, hi, var, rng.open_uniform()));
                log_density += xi * h.sqrt() * z + 0.5 * xi * xi * h;
                out.normals.push(z);
                out.shock.push(hi.exp());
                out.kernel.push(xi);
                out.density.push(log_density.exp());
                out.running_max.push(log_max.exp());
            }
            // the coarse node keeps its own kernel value
            *out.kernel.last_mut().expect("pushed above") = self.kernel[i + 1];
        }
        *out.shock.last_mut().expect("non-empty") = *self.shock.last().expect("non-empty");
        Ok(out)
    }

    pub(crate) fn check_grid(&self, other: TimeGrid, len: usize) -> Result<()> {
        if self.grid != other || self.shock.len() != len {
            return Err(Error::GridMismatch(format!(
                "shock path has {} nodes on {:?}, policy has {len} on {other:?}",
                self.shock.len(),
                self.grid
            )));
        }
        Ok(())
    }
}
