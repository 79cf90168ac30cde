//! Mean squared displacement, diffusion coefficients and the velocity
//! autocorrelation of free Brownian-Bohmian ensembles.

use crate::error::{Error, Result};
use crate::physics::Potential;
use crate::trajectories::TrajectoryEnsemble;

use super::series::{accumulate, accumulate_scalar, output_steps, Estimate, ObservableSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct MsdEstimate {
    /// `<<(q(t) - q(0))^2>>` over noise and velocities.
    pub classical: ObservableSeries,
    /// Bohmian MSD with the Born average over `x0` done exactly:
    /// `(q - q0)^2 + (sigma - sigma0)^2` per realization.
    pub quantum: ObservableSeries,
    /// Bohmian MSD from the sampled `x0`, `(x(t) - x0)^2`.
    pub quantum_sampled: ObservableSeries,
    pub diffusion_classical: ObservableSeries,
    pub diffusion_quantum: ObservableSeries,
}

fn free_only(ens: &TrajectoryEnsemble, op: &'static str) -> Result<()> {
    match ens.spec.potential {
        Potential::Free => Ok(()),
        other => Err(Error::UnsupportedPotential { op, kind: other.name() }),
    }
}

fn per_time(series: &ObservableSeries, name: &str) -> ObservableSeries {
    series.map(name, |t, v, e| if t > 0.0 { (v / (2.0 * t), e / (2.0 * t)) } else { (0.0, 0.0) })
}

/// MSD and `D(t) = MSD / 2t` (zero at `t = 0`) at up to `max_points` times.
pub fn estimate_msd_diffusion(ens: &TrajectoryEnsemble, max_points: usize) -> Result<MsdEstimate> {
    free_only(ens, "estimate_msd_diffusion")?;
    let grid = ens.grid();
    let steps = output_steps(&grid, max_points);
    let width = &ens.width;
    let s0 = width.sigma0();
    let stats = accumulate(ens, &steps, |traj, i| {
        let dq = traj.center.q[i] - traj.center.q[0];
        let spread = width.sigma[i] - s0;
        let dx = traj.x(i) - traj.member.x0;
        [dq * dq, dq * dq + spread * spread, dx * dx]
    })?;
    let times: Vec<f64> = steps.iter().map(|&i| grid.t(i)).collect();
    let seed = ens.seed();
    let tag = |s: ObservableSeries| {
        s.with_meta("dt", grid.dt)
            .with_meta("gamma", ens.spec.params.gamma)
            .with_meta("kT", ens.spec.params.kt)
    };
    let classical = tag(ObservableSeries::from_stats("msd_classical", times.clone(), &stats[0], seed));
    let quantum = tag(ObservableSeries::from_stats("msd_quantum", times.clone(), &stats[1], seed));
    let quantum_sampled = tag(ObservableSeries::from_stats("msd_quantum_sampled", times, &stats[2], seed));
    Ok(MsdEstimate {
        diffusion_classical: per_time(&classical, "diffusion_classical"),
        diffusion_quantum: per_time(&quantum, "diffusion_quantum"),
        classical,
        quantum,
        quantum_sampled,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VacfEstimate {
    /// `<<v(0) v(t)>>` with Bohmian velocities.
    pub series: ObservableSeries,
    /// Time where the correlation first drops to half its `t = 0` value,
    /// with a delta-method standard error; `None` if it never does.
    pub half_life: Option<Estimate>,
    /// Trapezoidal integral of the correlation over the whole horizon.
    pub integral: Estimate,
}

pub fn estimate_vacf(ens: &TrajectoryEnsemble, max_points: usize) -> Result<VacfEstimate> {
    free_only(ens, "estimate_vacf")?;
    let grid = ens.grid();
    let steps = output_steps(&grid, max_points);
    let stats = accumulate(ens, &steps, |traj, i| [traj.velocity(0) * traj.velocity(i)])?;
    let times: Vec<f64> = steps.iter().map(|&i| grid.t(i)).collect();
    let series = ObservableSeries::from_stats("vacf", times, &stats[0], ens.seed())
        .with_meta("dt", grid.dt)
        .with_meta("gamma", ens.spec.params.gamma)
        .with_meta("kT", ens.spec.params.kt);

    let dt = grid.dt;
    let (integral, _) = accumulate_scalar(ens, |traj| {
        let v0 = traj.velocity(0);
        let n = traj.len();
        let inner: f64 = (1..n - 1).map(|i| traj.velocity(i)).sum();
        Some(v0 * dt * (inner + 0.5 * (traj.velocity(0) + traj.velocity(n - 1))))
    })?;

    let half_life = half_life(ens, &series)?;
    Ok(VacfEstimate {
        series,
        half_life,
        integral: Estimate::from_stats(&integral),
    })
}

/// Root of `<<v(0) v(t) - v(0)^2 / 2>> = 0`. Its standard error is that of the
/// per-trajectory root function at the crossing divided by the slope there.
fn half_life(ens: &TrajectoryEnsemble, series: &ObservableSeries) -> Result<Option<Estimate>> {
    let c0 = series.values[0];
    let Some(k) = series.values.iter().position(|&c| c <= 0.5 * c0) else {
        return Ok(None);
    };
    if k == 0 {
        return Ok(None);
    }
    let (ta, tb) = (series.times[k - 1], series.times[k]);
    let (ca, cb) = (series.values[k - 1], series.values[k]);
    let slope = (cb - ca) / (tb - ta);
    let t_half = ta + (0.5 * c0 - ca) / slope;
    // the root function at t_half, interpolated on the fine grid
    let grid = ens.grid();
    let i = ((t_half / grid.dt) as usize).min(grid.steps - 1);
    let frac = (t_half - grid.t(i)) / grid.dt;
    let (g, _) = accumulate_scalar(ens, |traj| {
        let v0 = traj.velocity(0);
        let v = (1.0 - frac) * traj.velocity(i) + frac * traj.velocity(i + 1);
        Some(v0 * v - 0.5 * v0 * v0)
    })?;
    Ok(Some(Estimate {
        value: t_half,
        stderr: g.std_err() / slope.abs(),
        n: g.count(),
    }))
}
