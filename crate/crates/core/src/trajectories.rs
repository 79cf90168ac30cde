//! Bohmian stochastic trajectories and reproducible ensembles.
//!
//! A trajectory is `x(t) = q(t) + (sigma(t)/sigma(0)) (x0 - q(0))`: the
//! center path carries all the randomness (initial velocity and bath noise),
//! the width path is deterministic and shared by the whole ensemble.
//!
//! Ensembles do not store paths. Member `i` is regenerated on demand from
//! its substreams, which keeps memory flat for long horizons and makes every
//! reduction independent of the worker count.

use std::borrow::Cow;

use rayon::prelude::*;

use crate::dynamics::{integrate_langevin, integrate_pinney, CenterPath, Scheme, TimeGrid, WidthMode, WidthPath};
use crate::error::{Error, FieldError, Result};
use crate::noise::{sample_born_position, NoiseStream, VelocitySampler};
use crate::physics::{PhysicalParams, Potential};

/// `x = q[i] + (sigma[i]/sigma[0]) (x0 - q[0])`.
pub fn bohmian_position(x0: f64, center: &CenterPath, width: &WidthPath, i: usize) -> f64 {
    center.q[i] + width.sigma[i] / width.sigma[0] * (x0 - center.q[0])
}

/// Bohmian velocity `qdot[i] + (sigmadot[i]/sigma[0]) (x0 - q[0])`.
pub fn bohmian_velocity(x0: f64, center: &CenterPath, width: &WidthPath, i: usize) -> f64 {
    center.qdot[i] + width.sigmadot[i] / width.sigma[0] * (x0 - center.q[0])
}

/// How initial center velocities are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum VelocityInit {
    /// Maxwell-Boltzmann at the system temperature.
    #[default]
    Thermal,
    Fixed(f64),
}

/// How initial Bohmian positions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PositionInit {
    /// Sampled from `|psi(x, 0)|^2`.
    #[default]
    Born,
    /// Every member starts at `q0 + offset`.
    Offset(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub params: PhysicalParams,
    pub potential: Potential,
    pub q0: f64,
    pub sigma0: f64,
    pub n: usize,
    pub seed: u64,
    pub dt: f64,
    pub t_end: f64,
    pub width_mode: WidthMode,
    pub scheme: Scheme,
    pub velocity: VelocityInit,
    pub position: PositionInit,
}

impl EnsembleSpec {
    pub const DEFAULT_N: usize = 5000;

    pub fn new(params: PhysicalParams, potential: Potential, q0: f64, sigma0: f64) -> Self {
        Self {
            params,
            potential,
            q0,
            sigma0,
            n: Self::DEFAULT_N,
            seed: 0,
            dt: 0.01,
            t_end: 10.0,
            width_mode: WidthMode::Quantum,
            scheme: Scheme::default(),
            velocity: VelocityInit::Thermal,
            position: PositionInit::Born,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_time(mut self, dt: f64, t_end: f64) -> Self {
        self.dt = dt;
        self.t_end = t_end;
        self
    }

    pub fn with_width_mode(mut self, mode: WidthMode) -> Self {
        self.width_mode = mode;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_velocity(mut self, velocity: VelocityInit) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_position(mut self, position: PositionInit) -> Self {
        self.position = position;
        self
    }

    pub fn check(&self) -> Vec<FieldError> {
        let mut errors = self.params.check();
        errors.extend(self.potential.check());
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            errors.push(FieldError::new("sigma0", "sigma0 must be > 0"));
        }
        if !self.q0.is_finite() {
            errors.push(FieldError::new("q0", "q0 must be finite"));
        }
        if self.n < 1 {
            errors.push(FieldError::new("n_traj", "ensemble size must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errors.push(FieldError::new("dt", "dt must be > 0"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            errors.push(FieldError::new("t_end", "t_end must be > 0"));
        } else if self.t_end < self.dt {
            errors.push(FieldError::new("t_end", "t_end must be >= dt"));
        }
        errors
    }

    /// True when every member shares one center path: no bath noise and a
    /// single initial velocity.
    pub fn has_shared_center(&self) -> bool {
        let silent = self.params.gamma == 0.0 || self.params.kt == 0.0;
        let one_velocity = matches!(self.velocity, VelocityInit::Fixed(_)) || self.params.kt_system == 0.0;
        silent && one_velocity
    }
}

/// Initial data of one ensemble member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub index: usize,
    pub x0: f64,
    pub v0: f64,
}

/// One realized Bohmian trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory<'a> {
    pub member: Member,
    pub center: Cow<'a, CenterPath>,
    pub width: &'a WidthPath,
}

impl Trajectory<'_> {
    pub fn grid(&self) -> TimeGrid {
        self.center.grid
    }

    pub fn len(&self) -> usize {
        self.center.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.q.is_empty()
    }

    /// `x0 - q(0)`.
    pub fn offset(&self) -> f64 {
        self.member.x0 - self.center.q[0]
    }

    pub fn x(&self, i: usize) -> f64 {
        bohmian_position(self.member.x0, &self.center, self.width, i)
    }

    pub fn velocity(&self, i: usize) -> f64 {
        bohmian_velocity(self.member.x0, &self.center, self.width, i)
    }

    /// Position of the member of the same realization that started at
    /// `q(0) + offset`.
    pub fn x_with_offset(&self, offset: f64, i: usize) -> f64 {
        self.center.q[i] + self.width.sigma[i] / self.width.sigma[0] * offset
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }
}

/// `n` Bohmian stochastic trajectories sharing one width path.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub spec: EnsembleSpec,
    pub width: WidthPath,
    shared_center: Option<CenterPath>,
}

pub fn build_ensemble(spec: EnsembleSpec) -> Result<TrajectoryEnsemble> {
    TrajectoryEnsemble::build(spec)
}

impl TrajectoryEnsemble {
    pub fn build(spec: EnsembleSpec) -> Result<Self> {
        let errors = spec.check();
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let width = integrate_pinney(&spec.params, &spec.potential, spec.sigma0, spec.dt, spec.t_end, spec.width_mode)?;
        let mut ens = Self {
            spec,
            width,
            shared_center: None,
        };
        if ens.spec.has_shared_center() {
            let path = ens.integrate_center(0).map_err(|e| e.in_trajectory(0))?;
            ens.shared_center = Some(path);
        }
        Ok(ens)
    }

    pub fn len(&self) -> usize {
        self.spec.n
    }

    pub fn is_empty(&self) -> bool {
        self.spec.n == 0
    }

    pub fn grid(&self) -> TimeGrid {
        self.width.grid
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }

    /// The single center path of a noiseless, fixed-velocity ensemble.
    pub fn shared_center(&self) -> Option<&CenterPath> {
        self.shared_center.as_ref()
    }

    pub fn member(&self, index: usize) -> Member {
        let s = &self.spec;
        let x0 = match s.position {
            PositionInit::Born => sample_born_position(s.seed, index as u64, s.q0, s.sigma0),
            PositionInit::Offset(d) => s.q0 + d,
        };
        let v0 = match s.velocity {
            VelocityInit::Thermal => VelocitySampler::new(&s.params, s.seed).sample(index as u64),
            VelocityInit::Fixed(v) => v,
        };
        Member { index, x0, v0 }
    }

    fn integrate_center(&self, index: usize) -> Result<CenterPath> {
        let s = &self.spec;
        let v0 = self.member(index).v0;
        let mut stream = NoiseStream::new(s.seed, index as u64, &s.params, s.dt);
        integrate_langevin(&s.params, &s.potential, s.q0, v0, &mut stream, s.t_end, s.scheme)
    }

    pub fn trajectory(&self, index: usize) -> Result<Trajectory<'_>> {
        if index >= self.spec.n {
            return Err(Error::InvalidArgument(format!(
                "trajectory index {index} out of range (n = {})",
                self.spec.n
            )));
        }
        let center = match &self.shared_center {
            Some(path) => Cow::Borrowed(path),
            None => Cow::Owned(self.integrate_center(index).map_err(|e| e.in_trajectory(index))?),
        };
        Ok(Trajectory {
            member: self.member(index),
            center,
            width: &self.width,
        })
    }

    /// Applies `f` to every trajectory in parallel; results come back in
    /// index order. The first failing index (lowest, not first finished)
    /// is reported.
    pub fn map_ordered<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Trajectory<'_>) -> R + Sync + Send,
    {
        self.map_range_ordered(0..self.spec.n, f)
    }

    /// [`TrajectoryEnsemble::map_ordered`] restricted to `range`, for
    /// reductions that stream over the ensemble in chunks.
    pub fn map_range_ordered<R, F>(&self, range: std::ops::Range<usize>, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Trajectory<'_>) -> R + Sync + Send,
    {
        let results: Vec<Result<R>> = range
            .into_par_iter()
            .map(|i| self.trajectory(i).map(|traj| f(&traj)))
            .collect();
        results.into_iter().collect()
    }
}
