//! Closed-form widths, moments and distributions of thermal packets.

use std::f64::consts::PI;

use crate::dynamics::{DampedKernel, WidthPath};
use crate::error::{Error, Result};
use crate::physics::{PhysicalParams, Potential};

/// Quantum width of the frictionless zero-temperature packet,
/// `sigma0 sqrt(c^2 + hbar^2 s^2 / (4 m^2 sigma0^4))`.
pub fn frictionless_width(params: &PhysicalParams, potential: &Potential, sigma0: f64, t: f64) -> f64 {
    let k = DampedKernel::new(0.0, potential).eval(t);
    let a = params.hbar / (2.0 * params.mass * sigma0 * sigma0);
    sigma0 * (k.c * k.c + a * a * k.s * k.s).sqrt()
}

/// Width of the Maxwell-Boltzmann mixture of packets,
/// `sqrt(sigma_q^2 + (kT_s/m) s(t)^2)`, with `s` the damped velocity
/// response (`e^{-gamma t/2} sinh(Omega t)/Omega` for the repeller).
///
/// `sigma_q` comes from `width` when given; otherwise only the frictionless
/// closed form is available.
pub fn thermal_width(
    params: &PhysicalParams,
    potential: &Potential,
    sigma0: f64,
    t: f64,
    width: Option<&WidthPath>,
) -> Result<f64> {
    let sigma_q = match width {
        Some(path) => path
            .try_at(t)
            .ok_or_else(|| Error::InvalidArgument(format!("t = {t} beyond the width horizon")))?
            .0,
        None if params.gamma == 0.0 => frictionless_width(params, potential, sigma0, t),
        None => {
            return Err(Error::InvalidArgument(
                "the dissipative width needs an integrated width path".into(),
            ))
        }
    };
    let s = DampedKernel::from_params(params, potential).eval(t).s;
    Ok((sigma_q * sigma_q + params.kt_system / params.mass * s * s).sqrt())
}

/// First two momentum moments and the momentum uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumStats {
    pub mean: f64,
    pub second: f64,
    pub uncertainty: f64,
}

/// Thermal momentum moments of the frictionless packet.
pub fn momentum_stats(
    params: &PhysicalParams,
    potential: &Potential,
    sigma0: f64,
    q0: f64,
    t: f64,
) -> Result<MomentumStats> {
    if params.gamma != 0.0 {
        return Err(Error::InvalidArgument(
            "momentum moments are closed-form only without friction".into(),
        ));
    }
    let m = params.mass;
    let base = params.hbar * params.hbar / (4.0 * sigma0 * sigma0) + m * params.kt_system;
    let (mean, var) = match *potential {
        Potential::Free => (0.0, base),
        Potential::Linear { g } => (-m * g * t, base),
        Potential::ParabolicRepeller { omega } | Potential::Harmonic { omega } => {
            // harmonic: omega -> i omega turns cosh/sinh into cos/-sin
            let k = DampedKernel::new(0.0, potential).eval(t);
            let rate = omega * omega * k.s;
            let sign = if matches!(potential, Potential::Harmonic { .. }) { -1.0 } else { 1.0 };
            let mean = m * q0 * sign * rate;
            let var = base * k.c * k.c + m * m * sigma0 * sigma0 * rate * rate;
            (mean, var)
        }
    };
    Ok(MomentumStats {
        mean,
        second: var + mean * mean,
        uncertainty: var.sqrt(),
    })
}

fn free_only(op: &'static str, potential: &Potential) -> Result<()> {
    match potential {
        Potential::Free => Ok(()),
        other => Err(Error::UnsupportedPotential {
            op,
            kind: other.name(),
        }),
    }
}

/// Thermal Wigner function of the free packet.
///
/// Normalized Gaussian in `(x, p)` with momentum variance
/// `B / (4 sigma0^2)`, `B = hbar^2 + 4 m sigma0^2 kT_s`, and position shear
/// `x - q0 - p t / m`.
pub fn wigner_free(
    params: &PhysicalParams,
    potential: &Potential,
    sigma0: f64,
    q0: f64,
    x: f64,
    p: f64,
    t: f64,
) -> Result<f64> {
    free_only("wigner_free", potential)?;
    let m = params.mass;
    let b = params.hbar * params.hbar + 4.0 * m * sigma0 * sigma0 * params.kt_system;
    let shear = m * (x - q0) - p * t;
    let exponent = -2.0 * sigma0 * sigma0 * p * p / b - shear * shear / (2.0 * m * m * sigma0 * sigma0);
    Ok(exponent.exp() / (PI * b.sqrt()))
}

/// Momentum distribution of the free thermal packet, a centered Gaussian
/// with standard deviation `sqrt(hbar^2/(4 sigma0^2) + m kT_s)`.
pub fn momentum_distribution(params: &PhysicalParams, sigma0: f64, p: f64) -> f64 {
    let var = params.hbar * params.hbar / (4.0 * sigma0 * sigma0) + params.mass * params.kt_system;
    (-p * p / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// Center moments averaged over noise and initial velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalMoments {
    pub kind: &'static str,
    pub t: f64,
    pub mean_q: f64,
    pub mean_v: f64,
    pub second_q: f64,
    pub second_v: f64,
}

impl ThermalMoments {
    pub fn var_q(&self) -> f64 {
        self.second_q - self.mean_q * self.mean_q
    }

    pub fn var_v(&self) -> f64 {
        self.second_v - self.mean_v * self.mean_v
    }
}

/// Position variance of the center from bath noise (temperature `kT`) and
/// initial velocities (temperature `kT_s`).
pub fn center_variance(params: &PhysicalParams, potential: &Potential, t: f64) -> f64 {
    let k = DampedKernel::from_params(params, potential);
    let s = k.eval(t).s;
    (params.kt * k.noise_position_variance(t) + params.kt_system * s * s) / params.mass
}

pub fn thermal_moments(params: &PhysicalParams, potential: &Potential, q0: f64, t: f64) -> ThermalMoments {
    let k = DampedKernel::from_params(params, potential);
    let e = k.eval(t);
    let (mean_q, mean_v) = k.center(q0, 0.0, t);
    let var_q = center_variance(params, potential, t);
    let var_v = (params.kt * k.noise_velocity_variance(t) + params.kt_system * e.sdot * e.sdot) / params.mass;
    ThermalMoments {
        kind: potential.name(),
        t,
        mean_q,
        mean_v,
        second_q: mean_q * mean_q + var_q,
        second_v: mean_v * mean_v + var_v,
    }
}

/// Classical and Bohmian mean squared displacements of the free particle
/// and the matching time-dependent diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusion {
    pub t: f64,
    pub msd_cl: f64,
    pub msd_q: f64,
    pub d_cl: f64,
    pub d_q: f64,
}

pub fn msd_and_diffusion(params: &PhysicalParams, width: &WidthPath, t: f64) -> Result<Diffusion> {
    let (sigma, _) = width
        .try_at(t)
        .ok_or_else(|| Error::InvalidArgument(format!("t = {t} beyond the width horizon")))?;
    let msd_cl = center_variance(params, &Potential::Free, t);
    let spread = sigma - width.sigma0();
    let msd_q = msd_cl + spread * spread;
    let (d_cl, d_q) = if t > 0.0 {
        (msd_cl / (2.0 * t), msd_q / (2.0 * t))
    } else {
        (0.0, 0.0)
    };
    Ok(Diffusion {
        t,
        msd_cl,
        msd_q,
        d_cl,
        d_q,
    })
}

/// Einstein diffusion constant `kT / (m gamma)`.
pub fn diffusion_constant(params: &PhysicalParams) -> f64 {
    params.kt / (params.mass * params.gamma)
}

/// Free-particle velocity autocorrelation `(kT_s/m) e^{-gamma t}`, the same
/// for every Bohmian initial position.
pub fn vacf(params: &PhysicalParams, t: f64) -> f64 {
    params.kt_system / params.mass * (-params.gamma * t).exp()
}

/// Position-momentum uncertainty product `U(t)` of the free thermal packet.
pub fn uncertainty_product(params: &PhysicalParams, width: &WidthPath, t: f64) -> Result<f64> {
    let (sigma, sigmadot) = width
        .try_at(t)
        .ok_or_else(|| Error::InvalidArgument(format!("t = {t} beyond the width horizon")))?;
    let m = params.mass;
    let k = DampedKernel::from_params(params, &Potential::Free);
    let e = k.eval(t);
    let var_q = center_variance(params, &Potential::Free, t);
    let var_v = (params.kt * k.noise_velocity_variance(t) + params.kt_system * e.sdot * e.sdot) / m;
    let dx2 = var_q + sigma * sigma;
    let dp2 = m * m * var_v + m * m * sigmadot * sigmadot + params.hbar * params.hbar / (4.0 * sigma * sigma);
    Ok((dx2 * dp2).sqrt())
}

/// Distribution of the center position over noise realizations for a fixed
/// initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum W1Distribution {
    Gaussian { mean: f64, variance: f64 },
    /// No noise has accumulated (t = 0, or a silent bath).
    PointMass { at: f64 },
}

impl W1Distribution {
    pub fn mean(&self) -> f64 {
        match *self {
            W1Distribution::Gaussian { mean, .. } => mean,
            W1Distribution::PointMass { at } => at,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            W1Distribution::Gaussian { variance, .. } => variance,
            W1Distribution::PointMass { .. } => 0.0,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, W1Distribution::PointMass { .. })
    }

    pub fn density(&self, q: f64) -> f64 {
        match *self {
            W1Distribution::Gaussian { mean, variance } => {
                (-(q - mean).powi(2) / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
            }
            W1Distribution::PointMass { at } => {
                if q == at {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }
}

pub fn w1_distribution(params: &PhysicalParams, potential: &Potential, q0: f64, v0: f64, t: f64) -> W1Distribution {
    let k = DampedKernel::from_params(params, potential);
    let mean = k.center(q0, v0, t).0;
    let variance = params.kt / params.mass * k.noise_position_variance(t);
    if variance > 0.0 {
        W1Distribution::Gaussian { mean, variance }
    } else {
        W1Distribution::PointMass { at: mean }
    }
}

pub fn w1_density(params: &PhysicalParams, potential: &Potential, q0: f64, v0: f64, q: f64, t: f64) -> f64 {
    w1_distribution(params, potential, q0, v0, t).density(q)
}
