//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha substream addressed by
//! `(seed, layer, index)`. Layers keep Born positions, initial velocities
//! and bath noise disjoint, so any one of them can be frozen while the
//! others vary, and the draws for trajectory `i` never depend on how many
//! workers run the ensemble.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::physics::PhysicalParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Born = 0,
    Velocity = 1,
    Bath = 2,
}

const INDEX_BITS: u32 = 48;

pub fn substream(seed: u64, layer: Layer, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << INDEX_BITS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((layer as u64) << INDEX_BITS) | index);
    rng
}

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Gaussian white-noise impulses for one trajectory.
///
/// Each call returns `int F_r dt` over one step: zero mean, variance
/// `2 m gamma kT dt`, independent between steps (Ito discretization).
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    index: u64,
    dt: f64,
    impulse_std: f64,
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, index: u64, params: &PhysicalParams, dt: f64) -> Self {
        let impulse_std = (2.0 * params.mass * params.gamma * params.kt * dt).sqrt();
        Self {
            seed,
            index,
            dt,
            impulse_std,
            rng: substream(seed, Layer::Bath, index),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn index(&self) -> u64 {
        self.index
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn impulse_std(&self) -> f64 {
        self.impulse_std
    }

    pub fn is_silent(&self) -> bool {
        self.impulse_std == 0.0
    }

    /// One momentum impulse.
    pub fn sample_impulse(&mut self) -> f64 {
        if self.is_silent() {
            return 0.0;
        }
        self.impulse_std * standard_normal(&mut self.rng)
    }

    /// Two independent standard normals; the second drives the position
    /// correction of second-order Langevin schemes.
    pub fn standard_pair(&mut self) -> (f64, f64) {
        let xi = standard_normal(&mut self.rng);
        let eta = standard_normal(&mut self.rng);
        (xi, eta)
    }
}

/// Maxwell-Boltzmann initial velocities at the system temperature.
#[derive(Debug, Clone, Copy)]
pub struct VelocitySampler {
    pub kt_system: f64,
    pub mass: f64,
    pub seed: u64,
}

impl VelocitySampler {
    pub fn new(params: &PhysicalParams, seed: u64) -> Self {
        Self {
            kt_system: params.kt_system,
            mass: params.mass,
            seed,
        }
    }

    /// Velocity of trajectory `index`. Exactly zero at zero temperature.
    pub fn sample(&self, index: u64) -> f64 {
        if self.kt_system == 0.0 {
            return 0.0;
        }
        let mut rng = substream(self.seed, Layer::Velocity, index);
        (self.kt_system / self.mass).sqrt() * standard_normal(&mut rng)
    }
}

/// Initial Bohmian position of trajectory `index`, distributed as `|psi(x, 0)|^2`.
pub fn sample_born_position(seed: u64, index: u64, q0: f64, sigma0: f64) -> f64 {
    let mut rng = substream(seed, Layer::Born, index);
    q0 + sigma0 * standard_normal(&mut rng)
}
