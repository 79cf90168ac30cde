use std::io::{self, Write};

use crate::dynamics::TimeGrid;
use crate::error::Result;
use crate::trajectories::{Trajectory, TrajectoryEnsemble};

/// Trajectories regenerated per parallel batch by the streaming reductions.
pub const CHUNK: usize = 512;

/// Welford mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance; NaN below two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut stats = Self::new();
        iter.into_iter().for_each(|x| stats.push(x));
        stats
    }
}

/// A mean value with its standard error over `n` independent samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    pub fn from_stats(stats: &RunningStats) -> Self {
        Self {
            value: stats.mean(),
            stderr: stats.std_err(),
            n: stats.count(),
        }
    }

    /// `|value - target| <= k stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

/// Ensemble mean of one observable on an output time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    /// Header of the first CSV column, `t` unless the curve runs over a
    /// parameter.
    pub axis: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    /// Extra `key = value` header lines (parameters, dt, ...).
    pub meta: Vec<(String, String)>,
}

impl ObservableSeries {
    pub fn from_stats(name: impl Into<String>, times: Vec<f64>, stats: &[RunningStats], seed: u64) -> Self {
        Self {
            name: name.into(),
            axis: "t".into(),
            n: stats.first().map_or(0, |s| s.count() as usize),
            values: stats.iter().map(RunningStats::mean).collect(),
            stderr: stats.iter().map(RunningStats::std_err).collect(),
            times,
            seed,
            meta: Vec::new(),
        }
    }

    /// A curve known without sampling error: zero stderr, `n = 0`.
    pub fn exact(name: impl Into<String>, axis: impl Into<String>, times: Vec<f64>, values: Vec<f64>, seed: u64) -> Self {
        Self {
            name: name.into(),
            axis: axis.into(),
            stderr: vec![0.0; values.len()],
            times,
            values,
            n: 0,
            seed,
            meta: Vec::new(),
        }
    }

    /// Curve of estimates over a parameter axis.
    pub fn from_estimates(name: impl Into<String>, axis: impl Into<String>, xs: Vec<f64>, estimates: &[Estimate], seed: u64) -> Self {
        Self {
            name: name.into(),
            axis: axis.into(),
            times: xs,
            values: estimates.iter().map(|e| e.value).collect(),
            stderr: estimates.iter().map(|e| e.stderr).collect(),
            n: estimates.first().map_or(0, |e| e.n as usize),
            seed,
            meta: Vec::new(),
        }
    }

    pub fn with_axis(mut self, axis: impl Into<String>) -> Self {
        self.axis = axis.into();
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry closest to `t`.
    pub fn at(&self, t: f64) -> Estimate {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map_or(0, |(i, _)| i);
        Estimate {
            value: self.values[i],
            stderr: self.stderr[i],
            n: self.n as u64,
        }
    }

    /// Applies `f(t, value, stderr) -> (value, stderr)` pointwise.
    pub fn map(&self, name: impl Into<String>, f: impl Fn(f64, f64, f64) -> (f64, f64)) -> Self {
        let (values, stderr) = self
            .times
            .iter()
            .zip(self.values.iter().zip(&self.stderr))
            .map(|(&t, (&v, &e))| f(t, v, e))
            .unzip();
        Self {
            name: name.into(),
            values,
            stderr,
            ..self.clone()
        }
    }

    /// `# name = value` header lines, then `<axis>,value,stderr` rows. Floats use
    /// Rust's shortest round-trip formatting, so equal runs give equal bytes.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# observable = {}", self.name)?;
        writeln!(out, "# n_traj = {}", self.n)?;
        writeln!(out, "# seed = {}", self.seed)?;
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{},value,stderr", self.axis)?;
        for ((t, v), e) in self.times.iter().zip(&self.values).zip(&self.stderr) {
            writeln!(out, "{t:?},{v:?},{e:?}")?;
        }
        Ok(())
    }
}

/// Every `stride`-th step so that at most `max_points` samples remain; the
/// final step is always included.
pub fn output_steps(grid: &TimeGrid, max_points: usize) -> Vec<usize> {
    let stride = grid.steps.div_ceil(max_points.max(2) - 1).max(1);
    let mut steps: Vec<usize> = (0..=grid.steps).step_by(stride).collect();
    if *steps.last().unwrap() != grid.steps {
        steps.push(grid.steps);
    }
    steps
}

/// Streams `f(trajectory, step) -> [f64; K]` over the ensemble at `steps`,
/// one [`RunningStats`] per (quantity, step). Trajectories are pushed in index
/// order, so the result does not depend on the worker count.
pub fn accumulate<const K: usize, F>(ens: &TrajectoryEnsemble, steps: &[usize], f: F) -> Result<Vec<Vec<RunningStats>>>
where
    F: Fn(&Trajectory<'_>, usize) -> [f64; K] + Sync + Send,
{
    let mut stats = vec![vec![RunningStats::new(); steps.len()]; K];
    let mut start = 0;
    while start < ens.len() {
        let end = (start + CHUNK).min(ens.len());
        let rows = ens.map_range_ordered(start..end, |traj| {
            steps.iter().map(|&i| f(traj, i)).collect::<Vec<_>>()
        })?;
        for row in rows {
            for (j, values) in row.into_iter().enumerate() {
                for (k, v) in values.into_iter().enumerate() {
                    stats[k][j].push(v);
                }
            }
        }
        start = end;
    }
    Ok(stats)
}

/// Streams a per-trajectory scalar (or `None` to exclude) into one
/// [`RunningStats`], keeping index order.
pub fn accumulate_scalar<F>(ens: &TrajectoryEnsemble, f: F) -> Result<(RunningStats, usize)>
where
    F: Fn(&Trajectory<'_>) -> Option<f64> + Sync + Send,
{
    let mut stats = RunningStats::new();
    let mut excluded = 0;
    let mut start = 0;
    while start < ens.len() {
        let end = (start + CHUNK).min(ens.len());
        for value in ens.map_range_ordered(start..end, &f)? {
            match value {
                Some(v) => stats.push(v),
                None => excluded += 1,
            }
        }
        start = end;
    }
    Ok((stats, excluded))
}
