use crate::error::{Error, Result};
use crate::physics::{PhysicalParams, Potential};

use super::TimeGrid;

/// Whether the width feels the quantum pressure term `hbar^2 / (4 m^2 sigma^3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WidthMode {
    #[default]
    Quantum,
    /// Classical limit: the width only follows the potential curvature.
    Classical,
}

/// Deterministic width `sigma(t)` and its rate on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthPath {
    pub grid: TimeGrid,
    pub sigma: Vec<f64>,
    pub sigmadot: Vec<f64>,
    pub mode: WidthMode,
}

impl WidthPath {
    pub fn sigma0(&self) -> f64 {
        self.sigma[0]
    }

    pub fn t_end(&self) -> f64 {
        self.grid.t_end()
    }

    /// `(sigma, sigmadot)` at an arbitrary time by cubic Hermite
    /// interpolation; `None` outside the integrated horizon.
    pub fn try_at(&self, t: f64) -> Option<(f64, f64)> {
        let h = self.grid.dt;
        if !(t >= 0.0) || t > self.t_end() * (1.0 + 1e-12) {
            return None;
        }
        let i = ((t / h) as usize).min(self.grid.steps - 1);
        let s = ((t - self.grid.t(i)) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.sigma[i], self.sigma[i + 1]);
        let (m0, m1) = (self.sigmadot[i] * h, self.sigmadot[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let slope = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        Some((value, slope))
    }

    /// Like [`WidthPath::try_at`] but panics past the horizon.
    pub fn at(&self, t: f64) -> (f64, f64) {
        self.try_at(t)
            .unwrap_or_else(|| panic!("t = {t} outside width horizon [0, {}]", self.t_end()))
    }
}

struct PinneyRhs {
    gamma: f64,
    kappa: f64,
    pressure: f64,
}

impl PinneyRhs {
    fn eval(&self, sigma: f64, sigmadot: f64) -> (f64, f64) {
        (
            sigmadot,
            -self.gamma * sigmadot + self.pressure / (sigma * sigma * sigma) + self.kappa * sigma,
        )
    }

    /// One RK4 step, or why it failed.
    fn rk4(&self, y: (f64, f64), h: f64) -> std::result::Result<(f64, f64), StepFailure> {
        let check = |s: f64, v: f64| {
            if !(s.is_finite() && v.is_finite()) {
                Err(StepFailure::Overflow)
            } else if s <= 0.0 {
                Err(StepFailure::Collapse)
            } else {
                Ok(())
            }
        };
        let k1 = self.eval(y.0, y.1);
        let y2 = (y.0 + 0.5 * h * k1.0, y.1 + 0.5 * h * k1.1);
        check(y2.0, y2.1)?;
        let k2 = self.eval(y2.0, y2.1);
        let y3 = (y.0 + 0.5 * h * k2.0, y.1 + 0.5 * h * k2.1);
        check(y3.0, y3.1)?;
        let k3 = self.eval(y3.0, y3.1);
        let y4 = (y.0 + h * k3.0, y.1 + h * k3.1);
        check(y4.0, y4.1)?;
        let k4 = self.eval(y4.0, y4.1);
        let next = (
            y.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            y.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        check(next.0, next.1)?;
        Ok(next)
    }

    /// Advances by `h`, halving into sub-steps whenever sigma would cross zero.
    fn advance(&self, y: (f64, f64), h: f64, min_h: f64, t: f64, step: usize) -> Result<(f64, f64)> {
        match self.rk4(y, h) {
            Ok(next) => Ok(next),
            Err(StepFailure::Overflow) => Err(Error::NonFinite {
                step,
                t,
                what: "width overflowed",
            }),
            Err(StepFailure::Collapse) if h * 0.5 < min_h => Err(Error::StepUnderflow { t }),
            Err(StepFailure::Collapse) => {
                let mid = self.advance(y, 0.5 * h, min_h, t, step)?;
                self.advance(mid, 0.5 * h, min_h, t + 0.5 * h, step)
            }
        }
    }
}

enum StepFailure {
    Collapse,
    Overflow,
}

/// Integrates `sigma'' + gamma sigma' - hbar^2/(4 m^2 sigma^3) + sigma V''/m = 0`
/// from `sigma(0) = sigma0`, `sigma'(0) = 0` with classical RK4.
///
/// The bath noise never enters: the width is shared by every realization.
pub fn integrate_pinney(
    params: &PhysicalParams,
    potential: &Potential,
    sigma0: f64,
    dt: f64,
    t_end: f64,
    mode: WidthMode,
) -> Result<WidthPath> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::config("sigma0", "sigma0 must be > 0"));
    }
    let grid = TimeGrid::from_horizon(dt, t_end)?;
    let rhs = PinneyRhs {
        gamma: params.gamma,
        kappa: potential.curvature_rate(),
        pressure: match mode {
            WidthMode::Quantum => params.hbar * params.hbar / (4.0 * params.mass * params.mass),
            WidthMode::Classical => 0.0,
        },
    };
    let min_h = dt * f64::EPSILON.sqrt() * 1e-2;
    let mut sigma = Vec::with_capacity(grid.len());
    let mut sigmadot = Vec::with_capacity(grid.len());
    let mut y = (sigma0, 0.0);
    sigma.push(y.0);
    sigmadot.push(y.1);
    for step in 1..=grid.steps {
        y = rhs.advance(y, dt, min_h, grid.t(step - 1), step)?;
        sigma.push(y.0);
        sigmadot.push(y.1);
    }
    Ok(WidthPath {
        grid,
        sigma,
        sigmadot,
        mode,
    })
}
