//! Residence times of Bohmian trajectories in an interval, their split into
//! transmitted and reflected sub-ensembles, and the transmitted fraction.

use crate::error::{Error, Result};
use crate::trajectories::TrajectoryEnsemble;

use super::series::{Estimate, RunningStats, CHUNK};

/// Time a path moving linearly from `a` to `b` over `dt` spends in `[x1, x2]`.
pub fn segment_residence(a: f64, b: f64, x1: f64, x2: f64, dt: f64) -> f64 {
    if a == b {
        return if (x1..=x2).contains(&a) { dt } else { 0.0 };
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let overlap = hi.min(x2) - lo.max(x1);
    if overlap <= 0.0 {
        0.0
    } else {
        dt * overlap / (hi - lo)
    }
}

/// Total time the sampled path spends in `[x1, x2]`, linear between samples.
pub fn residence_time(x: impl Fn(usize) -> f64, n: usize, dt: f64, x1: f64, x2: f64) -> f64 {
    let mut total = 0.0;
    let mut prev = x(0);
    for i in 1..n {
        let cur = x(i);
        total += segment_residence(prev, cur, x1, x2, dt);
        prev = cur;
    }
    total
}

/// Per-member residence time and final position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberDwell {
    pub residence: f64,
    pub final_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellEstimate {
    pub mean: Estimate,
    /// Members still inside the interval at the end of the grid; their
    /// residence is truncated.
    pub still_inside: usize,
}

impl DwellEstimate {
    pub fn horizon_warning(&self) -> bool {
        self.still_inside > 0
    }
}

/// Split by the side of `x_barrier` each member ends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitEstimate {
    pub p_tr: Estimate,
    pub tau_tr: Option<Estimate>,
    pub tau_ref: Option<Estimate>,
    pub dwell: DwellEstimate,
}

impl SplitEstimate {
    /// `P tau_tr + (1 - P) tau_ref`, which reproduces the dwell time.
    pub fn recombined(&self) -> f64 {
        let p = self.p_tr.value;
        self.tau_tr.map_or(0.0, |t| p * t.value) + self.tau_ref.map_or(0.0, |t| (1.0 - p) * t.value)
    }
}

fn check_interval(x1: f64, x2: f64) -> Result<()> {
    if !(x1.is_finite() && x2.is_finite()) || x1 > x2 {
        return Err(Error::InvalidArgument(format!("need finite x1 <= x2, got [{x1}, {x2}]")));
    }
    Ok(())
}

/// Residence and final position of every member, in index order.
///
/// A shared center path (noiseless, single velocity) is swept once over the
/// sorted initial offsets: per step, members inside at both ends get the
/// whole step through a difference array and only the few near the edges
/// are resolved one by one. Results equal the per-trajectory computation.
pub fn member_dwell(ens: &TrajectoryEnsemble, x1: f64, x2: f64) -> Result<Vec<MemberDwell>> {
    check_interval(x1, x2)?;
    match ens.shared_center() {
        Some(center) => Ok(sweep_shared(ens, center, x1, x2)),
        None => {
            let dt = ens.grid().dt;
            let mut out = Vec::with_capacity(ens.len());
            let mut start = 0;
            while start < ens.len() {
                let end = (start + CHUNK).min(ens.len());
                out.extend(ens.map_range_ordered(start..end, |traj| MemberDwell {
                    residence: residence_time(|i| traj.x(i), traj.len(), dt, x1, x2),
                    final_x: traj.x(traj.len() - 1),
                })?);
                start = end;
            }
            Ok(out)
        }
    }
}

fn sweep_shared(ens: &TrajectoryEnsemble, center: &crate::dynamics::CenterPath, x1: f64, x2: f64) -> Vec<MemberDwell> {
    let n = ens.len();
    let q0 = center.q[0];
    let width = &ens.width;
    let s0 = width.sigma0();
    let mut order: Vec<(f64, usize)> = (0..n).map(|k| (ens.member(k).x0 - q0, k)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let d: Vec<f64> = order.iter().map(|p| p.0).collect();
    let lower = |v: f64| d.partition_point(|&x| x < v);
    let upper = |v: f64| d.partition_point(|&x| x <= v);

    let dt = ens.grid().dt;
    let mut diff = vec![0.0; n + 1];
    let mut exact = vec![0.0; n];
    let x = |i: usize, dk: f64| center.q[i] + width.sigma[i] / s0 * dk;
    for i in 0..center.q.len() - 1 {
        let (ra, rb) = (width.sigma[i] / s0, width.sigma[i + 1] / s0);
        let (qa, qb) = (center.q[i], center.q[i + 1]);
        let (lo_a, hi_a) = ((x1 - qa) / ra, (x2 - qa) / ra);
        let (lo_b, hi_b) = ((x1 - qb) / rb, (x2 - qb) / rb);
        let outer = lower(lo_a.min(lo_b))..upper(hi_a.max(hi_b));
        if outer.is_empty() {
            continue;
        }
        // strictly interior at both ends, with a rounding margin so that
        // edge members are resolved exactly below
        let (lf, hf) = (lo_a.max(lo_b), hi_a.min(hi_b));
        let margin = 1e-12 * (lf.abs() + hf.abs() + 1.0);
        let full = lower(lf + margin)..upper(hf - margin);
        let partial: Vec<std::ops::Range<usize>> = if full.start < full.end {
            diff[full.start] += dt;
            diff[full.end] -= dt;
            vec![outer.start..full.start, full.end..outer.end]
        } else {
            vec![outer]
        };
        for range in partial {
            for k in range {
                exact[k] += segment_residence(x(i, d[k]), x(i + 1, d[k]), x1, x2, dt);
            }
        }
    }
    let last = center.q.len() - 1;
    let mut out = vec![
        MemberDwell {
            residence: 0.0,
            final_x: 0.0
        };
        n
    ];
    let mut running = 0.0;
    for (k, &(dk, index)) in order.iter().enumerate() {
        running += diff[k];
        out[index] = MemberDwell {
            residence: running + exact[k],
            final_x: x(last, dk),
        };
    }
    out
}

fn summarize(records: &[MemberDwell], x1: f64, x2: f64) -> DwellEstimate {
    let stats: RunningStats = records.iter().map(|r| r.residence).collect();
    DwellEstimate {
        mean: Estimate::from_stats(&stats),
        still_inside: records.iter().filter(|r| (x1..=x2).contains(&r.final_x)).count(),
    }
}

/// Born, Maxwell-Boltzmann and noise averaged residence time in `[x1, x2]`.
pub fn dwell_time_trajectory(ens: &TrajectoryEnsemble, x1: f64, x2: f64) -> Result<DwellEstimate> {
    Ok(summarize(&member_dwell(ens, x1, x2)?, x1, x2))
}

/// Classifies members as transmitted when they end beyond `x_barrier` and
/// averages the residence time per class.
pub fn split_by_final_side(ens: &TrajectoryEnsemble, x1: f64, x2: f64, x_barrier: f64) -> Result<SplitEstimate> {
    let records = member_dwell(ens, x1, x2)?;
    let mut tr = RunningStats::new();
    let mut re = RunningStats::new();
    let mut p = RunningStats::new();
    for r in &records {
        let through = r.final_x > x_barrier;
        p.push(if through { 1.0 } else { 0.0 });
        if through {
            tr.push(r.residence);
        } else {
            re.push(r.residence);
        }
    }
    let class = |s: &RunningStats| (s.count() > 0).then(|| Estimate::from_stats(s));
    Ok(SplitEstimate {
        p_tr: Estimate::from_stats(&p),
        tau_tr: class(&tr),
        tau_ref: class(&re),
        dwell: summarize(&records, x1, x2),
    })
}

/// Fraction of members beyond `x_barrier` at the end of the grid.
pub fn transmission_fraction(ens: &TrajectoryEnsemble, x_barrier: f64) -> Result<Estimate> {
    let mut stats = RunningStats::new();
    let mut start = 0;
    while start < ens.len() {
        let end = (start + CHUNK).min(ens.len());
        for through in ens.map_range_ordered(start..end, |traj| traj.x(traj.len() - 1) > x_barrier)? {
            stats.push(if through { 1.0 } else { 0.0 });
        }
        start = end;
    }
    Ok(Estimate::from_stats(&stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{BarrierProblem, TransportMode};
    use crate::physics::{PhysicalParams, Potential};
    use crate::trajectories::{EnsembleSpec, VelocityInit};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn repeller(gamma: f64, kt: f64, omega: f64, q0: f64, n: usize, t_end: f64) -> EnsembleSpec {
        EnsembleSpec::new(PhysicalParams::natural(gamma, kt), Potential::ParabolicRepeller { omega }, q0, 1.0)
            .with_n(n)
            .with_seed(5)
            .with_time(0.01, t_end)
    }

    #[test]
    fn segment_cases() {
        assert_eq!(segment_residence(-2.0, 2.0, -1.0, 1.0, 1.0), 0.5);
        assert_eq!(segment_residence(2.0, -2.0, -1.0, 1.0, 1.0), 0.5);
        assert_eq!(segment_residence(0.0, 0.5, -1.0, 1.0, 0.2), 0.2);
        assert_eq!(segment_residence(0.5, 3.0, -1.0, 1.0, 1.0), 0.2);
        assert_eq!(segment_residence(2.0, 3.0, -1.0, 1.0, 1.0), 0.0);
        assert_eq!(segment_residence(0.3, 0.3, -1.0, 1.0, 0.1), 0.1);
    }

    #[test]
    fn interval_left_of_the_packet_is_never_visited() {
        let ens = TrajectoryEnsemble::build(repeller(0.1, 0.0, 0.05, -20.0, 500, 200.0)).unwrap();
        let est = dwell_time_trajectory(&ens, 30.0, 40.0).unwrap();
        assert_eq!(est.mean.value, 0.0);
    }

    #[test]
    fn sweep_matches_per_trajectory_residence() {
        let ens = TrajectoryEnsemble::build(repeller(0.1, 0.0, 0.1, -3.0, 3000, 60.0)).unwrap();
        assert!(ens.shared_center().is_some());
        let fast = member_dwell(&ens, -1.0, 1.0).unwrap();
        let dt = ens.grid().dt;
        for k in (0..ens.len()).step_by(7) {
            let traj = ens.trajectory(k).unwrap();
            let slow = residence_time(|i| traj.x(i), traj.len(), dt, -1.0, 1.0);
            assert!((fast[k].residence - slow).abs() < 1e-9, "member {k}: {} vs {slow}", fast[k].residence);
            assert_relative_eq!(fast[k].final_x, traj.x(traj.len() - 1), max_relative = 1e-12);
        }
    }

    #[test]
    fn partition_identity_is_exact() {
        for spec in [
            repeller(0.1, 0.0, 0.05, -3.0, 4000, 150.0).with_velocity(VelocityInit::Fixed(0.3)),
            repeller(0.2, 0.5, 0.25, -3.0, 300, 40.0),
        ] {
            let ens = TrajectoryEnsemble::build(spec).unwrap();
            let s = split_by_final_side(&ens, -1.0, 1.0, 0.0).unwrap();
            assert_relative_eq!(s.recombined(), s.dwell.mean.value, max_relative = 1e-12);
        }
    }

    #[test]
    fn classified_times_match_min_max_formulas() {
        // pure packet, transmission of order one half
        let (gamma, omega, q0, v0) = (0.05, 0.1, -3.0, 0.3);
        let problem = BarrierProblem::new(PhysicalParams::natural(gamma, 0.0), omega, q0, 1.0).unwrap();
        let exact = problem.split_transit_times(TransportMode::Pure { v0 }, -1.0, 1.0).unwrap();
        let t_end = 40.0 / problem.lambda();
        let spec = repeller(gamma, 0.0, omega, q0, 20_000, t_end).with_velocity(VelocityInit::Fixed(v0)).with_time(0.02, t_end);
        let ens = TrajectoryEnsemble::build(spec).unwrap();
        let s = split_by_final_side(&ens, -1.0, 1.0, 0.0).unwrap();
        assert!(s.p_tr.within(exact.p_tr, 3.0), "{:?} vs {}", s.p_tr, exact.p_tr);
        let (tr, re) = (s.tau_tr.unwrap(), s.tau_ref.unwrap());
        assert!(tr.within(exact.tau_tr.unwrap(), 3.0), "{tr:?} vs {exact:?}");
        assert!(re.within(exact.tau_ref.unwrap(), 3.0), "{re:?} vs {exact:?}");
        assert!(s.dwell.mean.within(exact.dwell, 3.0));
    }

    #[test]
    fn stochastic_transmission_fraction_matches_erfc() {
        let (gamma, kt, omega, q0) = (0.2, 0.5, 0.5, -3.0);
        let problem = BarrierProblem::new(PhysicalParams::natural(gamma, kt), omega, q0, 1.0).unwrap();
        let stationary = problem.stationary_transmission(TransportMode::StochasticThermal).unwrap();
        let t_end = 25.0 / problem.lambda();
        let ens = TrajectoryEnsemble::build(repeller(gamma, kt, omega, q0, 2000, t_end)).unwrap();
        let frac = transmission_fraction(&ens, 0.0).unwrap();
        assert!(frac.within(stationary, 3.0), "{frac:?} vs {stationary}");
    }

    #[test]
    fn stderr_halves_when_n_quadruples() {
        let se = |n: usize| {
            let ens = TrajectoryEnsemble::build(repeller(0.2, 0.5, 0.5, -1.0, n, 10.0)).unwrap();
            transmission_fraction(&ens, 0.0).unwrap().stderr
        };
        let ratio = se(1000) / se(4000);
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn horizon_warning_when_members_are_still_inside() {
        let ens = TrajectoryEnsemble::build(repeller(0.1, 0.0, 0.05, -0.5, 200, 1.0)).unwrap();
        assert!(dwell_time_trajectory(&ens, -1.0, 1.0).unwrap().horizon_warning());
        assert!(dwell_time_trajectory(&ens, 1.0, -1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn segment_residence_is_bounded(a in -3.0f64..3.0, b in -3.0f64..3.0, dt in 0.001f64..1.0) {
            let r = segment_residence(a, b, -1.0, 1.0, dt);
            prop_assert!((0.0..=dt * (1.0 + 1e-12)).contains(&r));
            let flipped = segment_residence(b, a, -1.0, 1.0, dt);
            prop_assert!((r - flipped).abs() <= 1e-12 * dt);
        }
    }
}
