//! Time evolution of the packet center (stochastic Langevin) and width
//! (deterministic generalized Pinney equation).

mod kernel;
mod langevin;
mod pinney;

pub use kernel::{analytic_center, DampedKernel, KernelValues};
pub use langevin::{integrate_langevin, CenterPath, Scheme};
pub use pinney::{integrate_pinney, WidthMode, WidthPath};

/// Uniform grid `t_i = i dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Grid covering `[0, t_end]`; the last point is `t_end` rounded to a
    /// whole number of steps (at least one).
    pub fn from_horizon(dt: f64, t_end: f64) -> crate::Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(crate::Error::config("dt", "dt must be > 0"));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(crate::Error::config("t_end", "t_end must be > 0"));
        }
        let steps = ((t_end / dt).round() as usize).max(1);
        Ok(Self { dt, steps })
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.steps)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.t(i))
    }

    /// Every `stride`-th point of this grid.
    pub fn coarsen(&self, stride: usize) -> TimeGrid {
        let stride = stride.max(1);
        TimeGrid {
            dt: self.dt * stride as f64,
            steps: self.steps / stride,
        }
    }
}
