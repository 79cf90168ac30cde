//! First-arrival times of Bohmian trajectories at a detector.

use crate::error::Result;
use crate::trajectories::{Trajectory, TrajectoryEnsemble};

use super::series::{accumulate_scalar, Estimate, RunningStats, CHUNK};

/// Above this never-arrived fraction a summary is flagged.
pub const NEVER_FRACTION_LIMIT: f64 = 0.01;

/// Which crossings of the detector count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    /// From above `x_d` to at or below it.
    #[default]
    Down,
    /// From below `x_d` to at or above it.
    Up,
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalRecord {
    pub index: usize,
    pub x_d: f64,
    /// `None` if the trajectory has not arrived by the end of the grid.
    pub time: Option<f64>,
}

/// First crossing of `x_d` by the sampled path `x(i)`, `i = 0..n`, refined by
/// linear interpolation between the bracketing samples.
pub fn first_crossing(x: impl Fn(usize) -> f64, n: usize, dt: f64, x_d: f64, direction: Direction) -> Option<f64> {
    let mut prev = x(0);
    for i in 1..n {
        let cur = x(i);
        let down = prev > x_d && cur <= x_d;
        let up = prev < x_d && cur >= x_d;
        let hit = match direction {
            Direction::Down => down,
            Direction::Up => up,
            Direction::Either => down || up,
        };
        if hit {
            let frac = (x_d - prev) / (cur - prev);
            return Some((i as f64 - 1.0 + frac) * dt);
        }
        prev = cur;
    }
    None
}

pub fn first_arrival(traj: &Trajectory<'_>, x_d: f64, direction: Direction) -> ArrivalRecord {
    ArrivalRecord {
        index: traj.member.index,
        x_d,
        time: first_crossing(|i| traj.x(i), traj.len(), traj.grid().dt, x_d, direction),
    }
}

/// Mean arrival time over the trajectories that arrived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalSummary {
    pub x_d: f64,
    pub mean: Estimate,
    pub n_total: usize,
    pub n_never: usize,
}

impl ArrivalSummary {
    fn new(x_d: f64, stats: &RunningStats, n_never: usize) -> Self {
        Self {
            x_d,
            mean: Estimate::from_stats(stats),
            n_total: stats.count() as usize + n_never,
            n_never,
        }
    }

    pub fn never_fraction(&self) -> f64 {
        self.n_never as f64 / self.n_total as f64
    }

    /// More than [`NEVER_FRACTION_LIMIT`] of the ensemble never arrived, so
    /// the mean is biased towards early arrivals.
    pub fn excessive_never(&self) -> bool {
        self.never_fraction() > NEVER_FRACTION_LIMIT
    }
}

pub fn mean_arrival_time(ens: &TrajectoryEnsemble, x_d: f64, direction: Direction) -> Result<ArrivalSummary> {
    let (stats, never) = accumulate_scalar(ens, |traj| first_arrival(traj, x_d, direction).time)?;
    Ok(ArrivalSummary::new(x_d, &stats, never))
}

/// Mean arrival time per initial offset `x0 - q(0)`, each averaged over the
/// ensemble's velocities and noise realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalProfile {
    pub x_d: f64,
    pub offsets: Vec<f64>,
    pub bins: Vec<ArrivalSummary>,
}

impl ArrivalProfile {
    /// Bin means weighted by the initial Gaussian density `|psi(x0, 0)|^2`,
    /// skipping bins where nothing arrived.
    pub fn born_weighted_mean(&self, sigma0: f64) -> f64 {
        let (mut sum, mut norm) = (0.0, 0.0);
        for (d, bin) in self.offsets.iter().zip(&self.bins) {
            if bin.mean.n == 0 {
                continue;
            }
            let w = (-d * d / (2.0 * sigma0 * sigma0)).exp();
            sum += w * bin.mean.value;
            norm += w;
        }
        sum / norm
    }

    pub fn bin(&self, offset: f64) -> Option<&ArrivalSummary> {
        self.offsets.iter().position(|&d| d == offset).map(|k| &self.bins[k])
    }

    pub fn any_excessive_never(&self) -> bool {
        self.bins.iter().any(ArrivalSummary::excessive_never)
    }
}

pub fn arrival_profile(
    ens: &TrajectoryEnsemble,
    x_d: f64,
    direction: Direction,
    offsets: &[f64],
) -> Result<ArrivalProfile> {
    let mut stats = vec![RunningStats::new(); offsets.len()];
    let mut never = vec![0usize; offsets.len()];
    let dt = ens.grid().dt;
    let mut start = 0;
    while start < ens.len() {
        let end = (start + CHUNK).min(ens.len());
        let rows = ens.map_range_ordered(start..end, |traj| {
            offsets
                .iter()
                .map(|&d| first_crossing(|i| traj.x_with_offset(d, i), traj.len(), dt, x_d, direction))
                .collect::<Vec<_>>()
        })?;
        for row in rows {
            for (k, time) in row.into_iter().enumerate() {
                match time {
                    Some(t) => stats[k].push(t),
                    None => never[k] += 1,
                }
            }
        }
        start = end;
    }
    Ok(ArrivalProfile {
        x_d,
        offsets: offsets.to_vec(),
        bins: stats
            .iter()
            .zip(never)
            .map(|(s, n)| ArrivalSummary::new(x_d, s, n))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::WidthMode;
    use crate::physics::{PhysicalParams, Potential};
    use crate::trajectories::{EnsembleSpec, PositionInit, VelocityInit};

    fn falling(kt: f64, n: usize, mode: WidthMode) -> TrajectoryEnsemble {
        falling_until(kt, n, mode, 200.0)
    }

    fn falling_until(kt: f64, n: usize, mode: WidthMode, t_end: f64) -> TrajectoryEnsemble {
        let spec = EnsembleSpec::new(PhysicalParams::natural(0.2, kt), Potential::Linear { g: 0.05 }, 10.0, 1.0)
            .with_n(n)
            .with_seed(3)
            .with_time(0.01, t_end)
            .with_width_mode(mode);
        TrajectoryEnsemble::build(spec).unwrap()
    }

    #[test]
    fn interpolated_crossing() {
        let xs = [3.0, 2.0, 0.5, -1.0];
        let t = first_crossing(|i| xs[i], 4, 0.1, 1.0, Direction::Down).unwrap();
        assert!((t - (0.1 + 0.1 * (1.0 / 1.5))).abs() < 1e-15);
        assert_eq!(first_crossing(|i| xs[i], 4, 0.1, 1.0, Direction::Up), None);
        assert_eq!(first_crossing(|i| xs[i], 4, 0.1, 1.0, Direction::Either), Some(t));
    }

    #[test]
    fn starting_on_the_detector_and_leaving_never_arrives() {
        let xs = [0.0, 0.5, 1.0, 1.5];
        assert_eq!(first_crossing(|i| xs[i], 4, 0.1, 0.0, Direction::Either), None);
    }

    #[test]
    fn cold_falling_center_lands_at_45() {
        let spec = EnsembleSpec::new(PhysicalParams::natural(0.2, 0.0), Potential::Linear { g: 0.05 }, 10.0, 1.0)
            .with_n(1)
            .with_time(0.01, 100.0)
            .with_position(PositionInit::Offset(0.0));
        let ens = TrajectoryEnsemble::build(spec).unwrap();
        let rec = first_arrival(&ens.trajectory(0).unwrap(), 0.0, Direction::Down);
        // root of 0.2 t + e^{-0.2 t} = 9
        let mut t: f64 = 45.0;
        for _ in 0..50 {
            t -= (0.2 * t + (-0.2 * t).exp() - 9.0) / (0.2 - 0.2 * (-0.2 * t).exp());
        }
        assert!((rec.time.unwrap() - t).abs() < 0.01, "{rec:?} vs {t}");
    }

    #[test]
    fn cold_profile_orders_front_to_back() {
        let offsets: Vec<f64> = (-6..=6).map(|k| 0.5 * k as f64).collect();
        let q = arrival_profile(&falling(0.0, 1, WidthMode::Quantum), 0.0, Direction::Down, &offsets).unwrap();
        let cl = arrival_profile(&falling(0.0, 1, WidthMode::Classical), 0.0, Direction::Down, &offsets).unwrap();
        for p in [&q, &cl] {
            assert!(p.bins.windows(2).all(|b| b[1].mean.value > b[0].mean.value));
        }
        // same start at the center: same trajectory in both regimes
        assert_eq!(q.bin(0.0).unwrap().mean.value, cl.bin(0.0).unwrap().mean.value);
        // the classical profile is a pure translation: arrival at x0 = the center's arrival at -offset
        let center = falling(0.0, 1, WidthMode::Classical);
        let traj = center.trajectory(0).unwrap();
        for (&d, bin) in offsets.iter().zip(&cl.bins) {
            let t = first_crossing(|i| traj.center.q[i], traj.len(), 0.01, -d, Direction::Down).unwrap();
            assert!((bin.mean.value - t).abs() < 1e-9);
        }
        for k in 1..=6 {
            let (front, back) = (q.bins[6 - k].mean.value - cl.bins[6 - k].mean.value, q.bins[6 + k].mean.value - cl.bins[6 + k].mean.value);
            assert!(back > 0.0 && front < 0.0 && back > front.abs(), "offset {}: {back} vs {front}", 0.5 * k as f64);
        }
    }

    #[test]
    fn never_fraction_is_reported() {
        let spec = EnsembleSpec::new(PhysicalParams::natural(0.2, 0.0), Potential::Linear { g: 0.05 }, 10.0, 1.0)
            .with_n(20)
            .with_time(0.01, 10.0)
            .with_velocity(VelocityInit::Fixed(0.0));
        let ens = TrajectoryEnsemble::build(spec).unwrap();
        let s = mean_arrival_time(&ens, 0.0, Direction::Down).unwrap();
        assert_eq!((s.n_never, s.n_total), (20, 20));
        assert!(s.excessive_never() && s.mean.value.is_nan());
    }

    #[test]
    fn warm_ensemble_arrives_later_on_average() {
        let cold = mean_arrival_time(&falling(0.0, 1000, WidthMode::Quantum), 0.0, Direction::Down).unwrap();
        let warm = mean_arrival_time(&falling_until(0.1, 1000, WidthMode::Quantum, 400.0), 0.0, Direction::Down).unwrap();
        assert!(!warm.excessive_never(), "{warm:?}");
        assert!(warm.mean.value - 3.0 * warm.mean.stderr > cold.mean.value, "{warm:?} vs {cold:?}");
    }
}
