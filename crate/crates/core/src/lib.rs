//! Gaussian wave packets in a dissipative, fluctuating medium.
//!
//! The packet center follows a classical Langevin equation, the width a
//! deterministic generalized Pinney equation, and Bohmian stochastic
//! trajectories are obtained by scaling the initial offset from the center
//! with the width. On top of that sit closed-form thermal expressions
//! ([`analytics`]) and Monte-Carlo estimators ([`observables`]).

pub mod analytics;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod noise;
pub mod observables;
pub mod physics;
pub mod trajectories;

pub use error::{Error, FieldError, Result};
pub use physics::{omega_eff, DampedFrequency, DimensionlessUnits, PacketState, PhysicalParams, Potential};

/// Environment variable holding the number of ensemble worker threads.
pub const THREADS_ENV: &str = "SLB_THREADS";

/// Sizes the global worker pool from [`THREADS_ENV`] if set. Results never
/// depend on the worker count; only wall time does.
pub fn init_workers_from_env() -> Result<()> {
    match std::env::var(THREADS_ENV) {
        Ok(value) => {
            let n: usize = value
                .trim()
                .parse()
                .map_err(|_| Error::config(THREADS_ENV, format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
            set_worker_threads(n)
        }
        Err(_) => Ok(()),
    }
}

pub fn set_worker_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::config(THREADS_ENV, "worker count must be >= 1"));
    }
    // a second initialization keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
