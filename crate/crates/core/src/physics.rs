//! Physical parameters, the quadratic potential family and unit conventions.
//!
//! Everything inside the crate works in natural units where `hbar = m = 1`
//! unless a caller overrides them. Dimensionless "bar" units, built on the
//! initial packet width, are only used at the reporting boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};

/// Mass, Planck constant, friction and the two temperatures.
///
/// `kt` is the bath temperature (sets the noise strength through the
/// fluctuation-dissipation relation), `kt_system` the temperature of the
/// Maxwell-Boltzmann distribution of initial packet velocities. Both are
/// energies (`k_B T`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub hbar: f64,
    pub gamma: f64,
    pub kt: f64,
    pub kt_system: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            gamma: 0.0,
            kt: 0.0,
            kt_system: 0.0,
        }
    }
}

impl PhysicalParams {
    /// Natural units with bath and system at the same temperature.
    pub fn natural(gamma: f64, kt: f64) -> Self {
        Self {
            gamma,
            kt,
            kt_system: kt,
            ..Self::default()
        }
    }

    pub fn with_system_temperature(mut self, kt_system: f64) -> Self {
        self.kt_system = kt_system;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let errors = self.check();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    pub(crate) fn check(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            errors.push(FieldError::new("mass", "mass must be > 0"));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            errors.push(FieldError::new("hbar", "hbar must be > 0"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            errors.push(FieldError::new("gamma", "gamma must be >= 0"));
        }
        if !(self.kt >= 0.0 && self.kt.is_finite()) {
            errors.push(FieldError::new("kt", "kt must be >= 0"));
        }
        if !(self.kt_system >= 0.0 && self.kt_system.is_finite()) {
            errors.push(FieldError::new("kt_system", "kt_system must be >= 0"));
        }
        errors
    }

    /// Standard deviation of the Maxwell-Boltzmann initial velocity.
    pub fn thermal_velocity(&self) -> f64 {
        (self.kt_system / self.mass).sqrt()
    }
}

/// The closed family of potentials for which a Gaussian packet stays Gaussian.
///
/// `V(x) = m g x` for [`Potential::Linear`], `-m w^2 x^2 / 2` for the
/// repeller and `+m w^2 x^2 / 2` for the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Free,
    Linear { g: f64 },
    ParabolicRepeller { omega: f64 },
    Harmonic { omega: f64 },
}

impl Potential {
    pub fn name(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::Linear { .. } => "linear",
            Potential::ParabolicRepeller { .. } => "parabolic-repeller",
            Potential::Harmonic { .. } => "harmonic",
        }
    }

    pub fn value(&self, x: f64, mass: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Linear { g } => mass * g * x,
            Potential::ParabolicRepeller { omega } => -0.5 * mass * omega * omega * x * x,
            Potential::Harmonic { omega } => 0.5 * mass * omega * omega * x * x,
        }
    }

    pub fn gradient(&self, x: f64, mass: f64) -> f64 {
        mass * (self.gravity() - self.curvature_rate() * x)
    }

    /// Second derivative; constant in space for every kind.
    pub fn curvature(&self, mass: f64) -> f64 {
        -mass * self.curvature_rate()
    }

    /// `kappa` in `qddot = -g + kappa q`: `w^2` for the repeller, `-w^2`
    /// for the oscillator, zero otherwise.
    pub fn curvature_rate(&self) -> f64 {
        match *self {
            Potential::Free | Potential::Linear { .. } => 0.0,
            Potential::ParabolicRepeller { omega } => omega * omega,
            Potential::Harmonic { omega } => -omega * omega,
        }
    }

    /// Constant part of the force per unit mass, with sign `V' = m g`.
    pub fn gravity(&self) -> f64 {
        match *self {
            Potential::Linear { g } => g,
            _ => 0.0,
        }
    }

    /// Acceleration `-V'(x)/m`.
    pub fn acceleration(&self, x: f64) -> f64 {
        -self.gravity() + self.curvature_rate() * x
    }

    pub(crate) fn check(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        match *self {
            Potential::Free => {}
            Potential::Linear { g } => {
                if !g.is_finite() {
                    errors.push(FieldError::new("g", "g must be finite"));
                }
            }
            Potential::ParabolicRepeller { omega } | Potential::Harmonic { omega } => {
                if !(omega >= 0.0 && omega.is_finite()) {
                    errors.push(FieldError::new("omega", "omega must be >= 0"));
                }
            }
        }
        errors
    }
}

/// Center position/velocity and width/width-rate of the packet at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketState {
    pub q: f64,
    pub qdot: f64,
    pub sigma: f64,
    pub sigmadot: f64,
    pub t: f64,
}

impl PacketState {
    /// Initial state; the width always starts at rest.
    pub fn initial(q: f64, qdot: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::config("sigma0", "sigma0 must be > 0"));
        }
        Ok(Self {
            q,
            qdot,
            sigma,
            sigmadot: 0.0,
            t: 0.0,
        })
    }
}

/// Reference scales built on the initial width `sigma0`.
///
/// Time unit `2 m sigma0^2 / hbar`, frequency unit its inverse, temperature
/// unit (as an energy) `hbar^2 / (4 m sigma0^2)`, length unit `sigma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessUnits {
    pub sigma0: f64,
    pub mass: f64,
    pub hbar: f64,
}

impl DimensionlessUnits {
    pub fn new(sigma0: f64, mass: f64, hbar: f64) -> Self {
        Self { sigma0, mass, hbar }
    }

    pub fn natural(sigma0: f64) -> Self {
        Self::new(sigma0, 1.0, 1.0)
    }

    pub fn time(&self) -> f64 {
        2.0 * self.mass * self.sigma0 * self.sigma0 / self.hbar
    }

    pub fn frequency(&self) -> f64 {
        1.0 / self.time()
    }

    pub fn energy(&self) -> f64 {
        self.hbar * self.hbar / (4.0 * self.mass * self.sigma0 * self.sigma0)
    }

    pub fn length(&self) -> f64 {
        self.sigma0
    }

    pub fn time_from_bar(&self, t_bar: f64) -> f64 {
        t_bar * self.time()
    }
    pub fn time_to_bar(&self, t: f64) -> f64 {
        t / self.time()
    }
    pub fn rate_from_bar(&self, rate_bar: f64) -> f64 {
        rate_bar * self.frequency()
    }
    pub fn rate_to_bar(&self, rate: f64) -> f64 {
        rate / self.frequency()
    }
    pub fn energy_from_bar(&self, kt_bar: f64) -> f64 {
        kt_bar * self.energy()
    }
    pub fn energy_to_bar(&self, kt: f64) -> f64 {
        kt / self.energy()
    }
    pub fn length_from_bar(&self, x_bar: f64) -> f64 {
        x_bar * self.sigma0
    }
    pub fn length_to_bar(&self, x: f64) -> f64 {
        x / self.sigma0
    }
}

/// Characteristic frequency of the damped homogeneous motion
/// `qddot + gamma qdot - kappa q = 0`.
///
/// The discriminant `gamma^2/4 + kappa` selects hyperbolic (repeller, free,
/// overdamped oscillator), critical, or oscillatory (underdamped oscillator)
/// behaviour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampedFrequency {
    Hyperbolic(f64),
    Critical,
    Oscillatory(f64),
}

impl DampedFrequency {
    pub fn from_discriminant(disc: f64) -> Self {
        if disc > 0.0 {
            DampedFrequency::Hyperbolic(disc.sqrt())
        } else if disc < 0.0 {
            DampedFrequency::Oscillatory((-disc).sqrt())
        } else {
            DampedFrequency::Critical
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            DampedFrequency::Hyperbolic(w) | DampedFrequency::Oscillatory(w) => w,
            DampedFrequency::Critical => 0.0,
        }
    }
}

/// `Omega = sqrt(w^2 + gamma^2/4)` for the repeller; `sqrt(gamma^2/4 - w^2)`
/// (real or imaginary) for the oscillator; `gamma/2` for force-free motion.
pub fn omega_eff(gamma: f64, potential: &Potential) -> DampedFrequency {
    DampedFrequency::from_discriminant(0.25 * gamma * gamma + potential.curvature_rate())
}
