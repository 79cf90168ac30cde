//! Scattering off the parabolic repeller: transmission probabilities, the
//! probability `Q(x, t)` of being beyond `x`, dwell times and their
//! transmission/reflection split, and arrival-time distributions from the
//! probability current.
//!
//! Every quantity is an erfc of `(x - center) / (sqrt 2 width)` for some
//! choice of center and effective width, fixed by [`TransportMode`].

use crate::dynamics::{integrate_pinney, DampedKernel, WidthMode, WidthPath};
use crate::error::{Error, Result};
use crate::physics::{PhysicalParams, Potential};

use super::special::{erf, erfc, half_erfc, GaussHermite};

/// Which ensemble the packet describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportMode {
    /// A single dissipative packet launched with center velocity `v0`.
    Pure { v0: f64 },
    /// Maxwell-Boltzmann mixture of dissipative packets at `kT_s`, no noise.
    ThermalDissipative,
    /// Noise at the bath temperature `kT` on top of the `kT_s` mixture.
    StochasticThermal,
}

/// Center used by the noiseless thermal `Q`. The damped center solves the
/// equation of motion; the frictionless one, `q0 cosh(omega t)`, is kept for
/// comparison with the closed form written that way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterConvention {
    #[default]
    Damped,
    Frictionless,
}

/// How the transmission probability treats the part of the initial packet
/// already to the right of the barrier top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Localization {
    /// `Q(0, t)`: assumes the initial packet lies entirely left of the top.
    #[default]
    WellLocalized,
    /// Subtracts the initial right-hand weight and renormalizes by the
    /// left-hand weight, so `P(0) = 0` exactly.
    ExactRatio,
}

/// Transmission/reflection split of a dwell time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitTimes {
    pub p_tr: f64,
    pub dwell: f64,
    /// `None` when nothing is transmitted.
    pub tau_tr: Option<f64>,
    /// `None` when nothing is reflected.
    pub tau_ref: Option<f64>,
}

/// Normalized arrival-time density on a caller-supplied time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalDistribution {
    pub x_d: f64,
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    pub mean_time: f64,
    /// Velocity nodes dropped because their current vanished on the grid.
    pub skipped_nodes: usize,
}

/// Quadrature value with its estimated discretization and truncation errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub richardson: f64,
    pub tail: f64,
}

/// Beyond this, horizons stop growing (in units of `2 m sigma0^2 / hbar`).
const MAX_HORIZON_UNITS: f64 = 1e5;
/// Stationary values are read at `STATIONARY_AT / lambda` and checked
/// against `STATIONARY_CHECK / lambda`.
const STATIONARY_AT: f64 = 36.0;
const STATIONARY_CHECK: f64 = 30.0;
const HORIZON_DECAYS: f64 = 40.0;
const MAX_GROWTH: f64 = 200.0;

/// A packet of width `sigma0` centered at `q0`, scattering off
/// `V = -m omega^2 x^2 / 2`.
#[derive(Debug, Clone)]
pub struct BarrierProblem {
    pub params: PhysicalParams,
    pub omega: f64,
    pub q0: f64,
    pub sigma0: f64,
    pub center: CenterConvention,
    pub localization: Localization,
    kernel: DampedKernel,
    width: WidthPath,
}

impl BarrierProblem {
    /// Integrates the quantum width once, out to [`BarrierProblem::horizon`].
    pub fn new(params: PhysicalParams, omega: f64, q0: f64, sigma0: f64) -> Result<Self> {
        params.validate()?;
        let mut errors = Vec::new();
        if !(omega > 0.0 && omega.is_finite()) {
            errors.push(crate::FieldError::new("omega", "the repeller needs omega > 0"));
        }
        if !q0.is_finite() {
            errors.push(crate::FieldError::new("q0", "q0 must be finite"));
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            errors.push(crate::FieldError::new("sigma0", "sigma0 must be > 0"));
        }
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let potential = Potential::ParabolicRepeller { omega };
        let kernel = DampedKernel::from_params(&params, &potential);
        let t_unit = 2.0 * params.mass * sigma0 * sigma0 / params.hbar;
        let lambda = kernel.growth_rate();
        // every integrand decays like e^{-lambda t}; past MAX_GROWTH/lambda
        // the squared widths would overflow
        let horizon = (400.0 * t_unit)
            .max(HORIZON_DECAYS / lambda)
            .min(MAX_GROWTH / lambda)
            .min(MAX_HORIZON_UNITS * t_unit);
        let rate = match kernel.frequency() {
            crate::DampedFrequency::Hyperbolic(w) => w,
            _ => 0.0,
        };
        let dt = 0.01 / rate.max(params.gamma).max(1.0 / t_unit);
        let width = integrate_pinney(&params, &potential, sigma0, dt, horizon, WidthMode::Quantum)?;
        Ok(Self {
            params,
            omega,
            q0,
            sigma0,
            center: CenterConvention::Damped,
            localization: Localization::WellLocalized,
            kernel,
            width,
        })
    }

    pub fn with_center_convention(mut self, center: CenterConvention) -> Self {
        self.center = center;
        self
    }

    pub fn with_localization(mut self, localization: Localization) -> Self {
        self.localization = localization;
        self
    }

    pub fn potential(&self) -> Potential {
        Potential::ParabolicRepeller { omega: self.omega }
    }

    /// Growth rate `Omega - gamma/2` of centers and widths.
    pub fn lambda(&self) -> f64 {
        self.kernel.growth_rate()
    }

    pub fn horizon(&self) -> f64 {
        self.width.t_end()
    }

    /// Zero-temperature quantum width `sigma_gamma(t)` shared by every packet.
    pub fn width_path(&self) -> &WidthPath {
        &self.width
    }

    /// True when `q0 + 3 sigma0 >= 0`: the packet overlaps the barrier top
    /// and [`Localization::ExactRatio`] should be preferred.
    pub fn poorly_localized(&self) -> bool {
        self.q0 + 3.0 * self.sigma0 >= 0.0
    }

    fn sigma_at(&self, t: f64) -> Result<f64> {
        self.width
            .try_at(t)
            .map(|(s, _)| s)
            .ok_or_else(|| Error::InvalidArgument(format!("t = {t} beyond the horizon {}", self.horizon())))
    }

    pub fn center(&self, mode: TransportMode, t: f64) -> f64 {
        match mode {
            TransportMode::Pure { v0 } => self.kernel.center(self.q0, v0, t).0,
            TransportMode::ThermalDissipative if self.center == CenterConvention::Frictionless => {
                self.q0 * (self.omega * t).cosh()
            }
            _ => self.kernel.center(self.q0, 0.0, t).0,
        }
    }

    /// Effective width from a precomputed quantum width `sigma`.
    fn width_from(&self, mode: TransportMode, sigma: f64, t: f64) -> f64 {
        let m = self.params.mass;
        match mode {
            TransportMode::Pure { .. } => sigma,
            TransportMode::ThermalDissipative => {
                let s = self.kernel.eval(t).s;
                (sigma * sigma + self.params.kt_system / m * s * s).sqrt()
            }
            TransportMode::StochasticThermal => {
                let s = self.kernel.eval(t).s;
                let noise = self.params.kt / m * self.kernel.noise_position_variance(t);
                (sigma * sigma + noise + self.params.kt_system / m * s * s).sqrt()
            }
        }
    }

    pub fn width(&self, mode: TransportMode, t: f64) -> Result<f64> {
        Ok(self.width_from(mode, self.sigma_at(t)?, t))
    }

    /// Probability of finding the particle beyond `x` at time `t`.
    pub fn q_beyond(&self, mode: TransportMode, x: f64, t: f64) -> Result<f64> {
        let w = self.width(mode, t)?;
        Ok(half_erfc((x - self.center(mode, t)) / (std::f64::consts::SQRT_2 * w)))
    }

    pub fn transmission_probability(&self, mode: TransportMode, t: f64) -> Result<f64> {
        let p = self.q_beyond(mode, 0.0, t)?;
        Ok(self.localize(p))
    }

    fn localize(&self, p: f64) -> f64 {
        match self.localization {
            Localization::WellLocalized => p,
            Localization::ExactRatio => {
                let z0 = self.q0 / (std::f64::consts::SQRT_2 * self.sigma0);
                // (erf(a) - erf(b)) / erfc(b) with erf(a) = 2 p - 1
                (2.0 * p - 1.0 - erf(z0)) / erfc(z0)
            }
        }
    }

    /// Long-time plateau of the transmission probability.
    pub fn stationary_transmission(&self, mode: TransportMode) -> Result<f64> {
        let lambda = self.lambda();
        let late = STATIONARY_AT / lambda;
        let check = STATIONARY_CHECK / lambda;
        if late > self.horizon() {
            return Err(Error::NonConvergentTail {
                t_max: self.horizon(),
                tail: f64::NAN,
            });
        }
        let p = self.transmission_probability(mode, late)?;
        let earlier = self.transmission_probability(mode, check)?;
        let drift = (p - earlier).abs();
        if drift > 1e-9 * p.abs().max(1e-300) && drift > 1e-14 {
            return Err(Error::NonConvergentTail {
                t_max: late,
                tail: drift,
            });
        }
        Ok(p)
    }

    /// Values of `f(t_i, sigma_i)` on the width grid.
    fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        self.width
            .grid
            .times()
            .zip(&self.width.sigma)
            .map(|(t, &s)| f(t, s))
            .collect()
    }

    fn integrate(&self, values: &[f64]) -> Result<Quadrature> {
        let q = simpson_with_tail(values, self.width.grid.dt);
        let scale = q.value.abs();
        if q.tail > 1e-8 * scale && q.tail > 1e-15 {
            return Err(Error::NonConvergentTail {
                t_max: self.horizon(),
                tail: q.tail,
            });
        }
        Ok(q)
    }

    /// Mean time spent in `[x1, x2]`, `int_0^inf [Q(x1,t) - Q(x2,t)] dt`.
    pub fn dwell_time(&self, mode: TransportMode, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.dwell_quadrature(mode, x1, x2)?.value)
    }

    pub fn dwell_quadrature(&self, mode: TransportMode, x1: f64, x2: f64) -> Result<Quadrature> {
        check_interval(x1, x2)?;
        if x1 == x2 {
            return Ok(Quadrature {
                value: 0.0,
                richardson: 0.0,
                tail: 0.0,
            });
        }
        let values = self.sample(|t, s| {
            let c = self.center(mode, t);
            let w = std::f64::consts::SQRT_2 * self.width_from(mode, s, t);
            half_erfc((x1 - c) / w) - half_erfc((x2 - c) / w)
        });
        self.integrate(&values)
    }

    /// Split of the dwell time into transmitted and reflected sub-ensembles
    /// through the critical Bohmian trajectory, written with min/max of `Q`.
    ///
    /// The thermal version averages the per-velocity times over the
    /// Maxwell-Boltzmann distribution; the noisy ensemble has no single
    /// critical trajectory and is rejected.
    pub fn split_transit_times(&self, mode: TransportMode, x1: f64, x2: f64) -> Result<SplitTimes> {
        check_interval(x1, x2)?;
        match mode {
            TransportMode::Pure { v0 } => self.split_pure(v0, x1, x2),
            TransportMode::StochasticThermal => Err(Error::InvalidArgument(
                "the transmission/reflection split needs a noiseless ensemble".into(),
            )),
            TransportMode::ThermalDissipative => {
                if self.params.kt_system == 0.0 {
                    return self.split_pure(0.0, x1, x2);
                }
                let vth = (self.params.kt_system / self.params.mass).sqrt();
                let (mut tr, mut w_tr, mut re, mut w_re) = (0.0, 0.0, 0.0, 0.0);
                for (z, w) in GaussHermite::standard().normal_points() {
                    let s = self.split_pure(vth * z, x1, x2)?;
                    // degenerate nodes contribute to one sub-ensemble only
                    if let Some(t) = s.tau_tr {
                        tr += w * t;
                        w_tr += w;
                    }
                    if let Some(t) = s.tau_ref {
                        re += w * t;
                        w_re += w;
                    }
                }
                Ok(SplitTimes {
                    p_tr: self.stationary_transmission(mode)?,
                    dwell: self.dwell_time(mode, x1, x2)?,
                    tau_tr: (w_tr > 0.0).then(|| tr / w_tr),
                    tau_ref: (w_re > 0.0).then(|| re / w_re),
                })
            }
        }
    }

    fn split_pure(&self, v0: f64, x1: f64, x2: f64) -> Result<SplitTimes> {
        let mode = TransportMode::Pure { v0 };
        let p = self.stationary_transmission(mode)?;
        let dwell = self.dwell_time(mode, x1, x2)?;
        let qs = |t: f64, s: f64| {
            let c = self.center(mode, t);
            let w = std::f64::consts::SQRT_2 * s;
            (half_erfc((x1 - c) / w), half_erfc((x2 - c) / w))
        };
        let tau_tr = if p > 0.0 {
            let values = self.sample(|t, s| {
                let (q1, q2) = qs(t, s);
                q1.min(p) - q2.min(p)
            });
            Some(self.integrate(&values)?.value / p)
        } else {
            None
        };
        let tau_ref = if p < 1.0 {
            let values = self.sample(|t, s| {
                let (q1, q2) = qs(t, s);
                q1.max(p) - q2.max(p)
            });
            Some(self.integrate(&values)?.value / (1.0 - p))
        } else {
            None
        };
        Ok(SplitTimes {
            p_tr: p,
            dwell,
            tau_tr,
            tau_ref,
        })
    }

    /// `ln |j(x_d, t)|` for the pure packet launched at `v0`.
    fn log_current(&self, v0: f64, x_d: f64, t: f64) -> Result<f64> {
        let (sigma, sigmadot) = self
            .width
            .try_at(t)
            .ok_or_else(|| Error::InvalidArgument(format!("t = {t} beyond the horizon {}", self.horizon())))?;
        let (q, qdot) = self.kernel.center(self.q0, v0, t);
        let u = (x_d - q) / sigma;
        let log_rho = -0.5 * u * u - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        let v = qdot + sigmadot * u;
        Ok(log_rho + v.abs().ln())
    }

    /// Arrival-time density `|j(x_d, t)| / int |j| dt` on `times`, averaged
    /// over Maxwell-Boltzmann velocities in the thermal mode. Integrals are
    /// trapezoidal on the given grid.
    pub fn arrival_distribution_current(
        &self,
        mode: TransportMode,
        x_d: f64,
        times: &[f64],
    ) -> Result<ArrivalDistribution> {
        if times.len() < 2 || times.windows(2).any(|p| !(p[1] > p[0])) || !(times[0] >= 0.0) {
            return Err(Error::InvalidArgument(
                "arrival times need an increasing grid of at least two points starting at t >= 0".into(),
            ));
        }
        let nodes: Vec<(f64, f64)> = match mode {
            TransportMode::Pure { v0 } => vec![(v0, 1.0)],
            TransportMode::ThermalDissipative if self.params.kt_system == 0.0 => vec![(0.0, 1.0)],
            TransportMode::ThermalDissipative => {
                let vth = (self.params.kt_system / self.params.mass).sqrt();
                GaussHermite::standard().normal_points().map(|(z, w)| (vth * z, w)).collect()
            }
            TransportMode::StochasticThermal => {
                return Err(Error::InvalidArgument(
                    "the current-based arrival distribution needs a noiseless ensemble".into(),
                ))
            }
        };
        let mut density = vec![0.0; times.len()];
        let mut used = 0.0;
        let mut skipped = 0;
        for (v0, weight) in nodes {
            let logs = times
                .iter()
                .map(|&t| self.log_current(v0, x_d, t))
                .collect::<Result<Vec<_>>>()?;
            let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !peak.is_finite() {
                skipped += 1;
                continue;
            }
            let scaled: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
            let norm = trapezoid(times, &scaled);
            if !(norm > 0.0 && norm.is_finite()) {
                skipped += 1;
                continue;
            }
            for (d, s) in density.iter_mut().zip(&scaled) {
                *d += weight * s / norm;
            }
            used += weight;
        }
        if used == 0.0 {
            return Err(Error::Normalization(format!(
                "no probability current reaches x_d = {x_d} on [{}, {}]",
                times[0],
                times[times.len() - 1]
            )));
        }
        density.iter_mut().for_each(|d| *d /= used);
        let weighted: Vec<f64> = times.iter().zip(&density).map(|(t, d)| t * d).collect();
        Ok(ArrivalDistribution {
            x_d,
            times: times.to_vec(),
            mean_time: trapezoid(times, &weighted),
            density,
            skipped_nodes: skipped,
        })
    }
}

fn check_interval(x1: f64, x2: f64) -> Result<()> {
    if !(x1.is_finite() && x2.is_finite()) || x1 > x2 {
        return Err(Error::InvalidArgument(format!("need finite x1 <= x2, got [{x1}, {x2}]")));
    }
    Ok(())
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Composite Simpson on a uniform grid (trapezoid on a trailing odd panel),
/// a Richardson estimate from the doubled step, and an exponential tail
/// estimate `f(T) / rate` beyond the last sample.
pub fn simpson_with_tail(values: &[f64], h: f64) -> Quadrature {
    let simpson = |stride: usize| -> f64 {
        let pts: Vec<f64> = values.iter().step_by(stride).copied().collect();
        let hh = h * stride as f64;
        let n = pts.len() - 1;
        let even = n - n % 2;
        let mut sum = 0.0;
        for k in (0..even).step_by(2) {
            sum += pts[k] + 4.0 * pts[k + 1] + pts[k + 2];
        }
        let mut total = sum * hh / 3.0;
        if even < n {
            total += 0.5 * hh * (pts[n - 1] + pts[n]);
        }
        total
    };
    if values.len() < 3 {
        let value = if values.len() == 2 { 0.5 * h * (values[0] + values[1]) } else { 0.0 };
        return Quadrature {
            value,
            richardson: 0.0,
            tail: 0.0,
        };
    }
    let fine = simpson(1);
    let coarse = if values.len() >= 5 { simpson(2) } else { fine };
    let last = values[values.len() - 1].abs();
    let tail = if last == 0.0 {
        0.0
    } else {
        let back = (values.len() / 20).max(1);
        let prev = values[values.len() - 1 - back].abs();
        let rate = (prev / last).ln() / (back as f64 * h);
        if rate > 0.0 {
            last / rate
        } else {
            f64::INFINITY
        }
    };
    Quadrature {
        value: fine,
        richardson: (fine - coarse).abs() / 15.0,
        tail,
    }
}
