//! Experiment runner behind the `slb` binary: turns a validated
//! [`ExperimentConfig`] into one CSV per curve plus a manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use slb::analytics::{BarrierProblem, TransportMode};
use slb::config::{validate_config, ExperimentConfig, Observable, RunPoint, Scales, SweepKey, UnitSystem};
use slb::dynamics::{integrate_pinney, WidthMode};
use slb::observables::{
    arrival_profile, estimate_msd_diffusion, estimate_vacf, output_steps, split_by_final_side, Direction, Estimate,
    ObservableSeries,
};
use slb::trajectories::{EnsembleSpec, TrajectoryEnsemble, VelocityInit};
use slb::{Error, Potential};

pub const MANIFEST: &str = "manifest.toml";

#[derive(Debug)]
pub enum RunError {
    Config(Error),
    Numerical(Error),
    Io(io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
            RunError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(Error::Config(errs)) => {
                write!(f, "configuration error")?;
                for e in errs {
                    write!(f, "\n  {}: {}", e.field, e.message)?;
                }
                Ok(())
            }
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => RunError::Io(io),
            e if e.is_config() => RunError::Config(e),
            e => RunError::Numerical(e),
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub stem: String,
    pub series: ObservableSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub warnings: Vec<String>,
}

/// Validates, computes every curve and writes them with the manifest.
pub fn run(cfg: ExperimentConfig) -> Result<RunReport, RunError> {
    let validated = validate_config(cfg).map_err(RunError::Config)?;
    let cfg = validated.config;
    let curves = compute(&cfg)?;
    fs::create_dir_all(&cfg.out)?;
    let mut files = Vec::with_capacity(curves.len());
    for curve in &curves {
        let path = cfg.out.join(format!("{}.csv", curve.stem));
        curve.series.write_csv(BufWriter::new(fs::File::create(&path)?))?;
        files.push(path);
    }
    let manifest = cfg.out.join(MANIFEST);
    fs::write(&manifest, manifest_text(&cfg, &files, &validated.warnings)?)?;
    Ok(RunReport {
        files,
        manifest,
        warnings: validated.warnings,
    })
}

/// Reads a config or a manifest written by [`run`].
pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path)?;
    ExperimentConfig::from_toml_str(&text).map_err(RunError::Config)
}

const ELECTRON_MASS_KG: f64 = 9.109_383_7015e-31;
const HBAR_JS: f64 = 1.054_571_817e-34;
const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// The resolved config followed by a `[run]` table. The config part alone
/// reproduces the run.
pub fn manifest_text(cfg: &ExperimentConfig, files: &[PathBuf], warnings: &[String]) -> Result<String, RunError> {
    let mut text = cfg.to_toml_string().map_err(RunError::Config)?;
    let quote = |s: &str| format!("{s:?}");
    let names: Vec<String> = files
        .iter()
        .map(|f| quote(&f.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned())))
        .collect();
    let _ = write!(
        text,
        "\n[run]\ncode_version = \"{}\"\nobservable = \"{}\"\nfiles = [{}]\nwarnings = [{}]\n",
        env!("CARGO_PKG_VERSION"),
        cfg.observable().map_or("", Observable::name),
        names.join(", "),
        warnings.iter().map(|w| quote(w)).collect::<Vec<_>>().join(", "),
    );
    if let (UnitSystem::Bar, Some(angstrom)) = (cfg.units, cfg.electron_sigma0_angstrom) {
        let sigma0 = angstrom * 1e-10;
        let time = 2.0 * ELECTRON_MASS_KG * sigma0 * sigma0 / HBAR_JS;
        let temperature = HBAR_JS * HBAR_JS / (4.0 * ELECTRON_MASS_KG * sigma0 * sigma0 * BOLTZMANN_J_PER_K);
        let _ = write!(text, "time_unit_seconds = {time:e}\ntemperature_unit_kelvin = {temperature:e}\n");
    }
    Ok(text)
}

/// Every curve of the experiment, in config units.
pub fn compute(cfg: &ExperimentConfig) -> Result<Vec<Curve>, RunError> {
    let obs = cfg
        .observable()
        .ok_or_else(|| RunError::Config(Error::config("observable", "the custom preset needs an observable")))?;
    let scales = cfg.scales();
    let mut curves = Vec::new();
    let points = cfg.run_points();
    let scalar = matches!(obs, Observable::Dwell | Observable::Transit);
    for point in &points {
        if !scalar {
            for (suffix, series) in primary(cfg, obs, point, scales)? {
                curves.push(Curve {
                    stem: stem(cfg, &point.label, &suffix),
                    series: tag(series, cfg, point),
                });
            }
        }
    }
    // scalar summaries, once per sweep point with the scanned key removed
    if scalar || cfg.scan.is_some() {
        let key = cfg.scan.as_ref().map(|s| s.key);
        let mut groups: Vec<Vec<(SweepKey, f64)>> = Vec::new();
        for point in &points {
            let group: Vec<_> = point.label.iter().copied().filter(|(k, _)| Some(*k) != key).collect();
            if !groups.contains(&group) {
                groups.push(group);
            }
        }
        for group in groups {
            curves.extend(summary(cfg, obs, &group, scales)?);
        }
    }
    Ok(curves)
}

fn stem(cfg: &ExperimentConfig, label: &[(SweepKey, f64)], suffix: &str) -> String {
    let mut stem = cfg.preset.name().to_string();
    for (k, v) in label {
        let _ = write!(stem, "_{}{v}", k.name());
    }
    if !suffix.is_empty() {
        stem.push('_');
        stem.push_str(suffix);
    }
    stem
}

fn potential_meta(p: &Potential) -> String {
    match p {
        Potential::Free => "free".into(),
        Potential::Linear { g } => format!("linear g={g}"),
        Potential::ParabolicRepeller { omega } => format!("parabolic-repeller omega={omega}"),
        Potential::Harmonic { omega } => format!("harmonic omega={omega}"),
    }
}

/// Header lines shared by every file: the curve's parameters in config units.
fn tag(series: ObservableSeries, cfg: &ExperimentConfig, point: &RunPoint) -> ObservableSeries {
    tag_label(series, cfg, &point.label)
}

fn tag_label(series: ObservableSeries, cfg: &ExperimentConfig, label: &[(SweepKey, f64)]) -> ObservableSeries {
    let mut params = cfg.params;
    let mut potential = cfg.potential;
    for &(k, v) in label {
        match k {
            SweepKey::Gamma => params.gamma = v,
            SweepKey::Kt => params.kt = v,
            SweepKey::KtSystem => params.kt_system = Some(v),
            SweepKey::Omega => {
                potential = match potential {
                    Potential::Harmonic { .. } => Potential::Harmonic { omega: v },
                    _ => Potential::ParabolicRepeller { omega: v },
                }
            }
        }
    }
    let units = match cfg.units {
        UnitSystem::Natural => "natural",
        UnitSystem::Bar => "bar",
    };
    let mut s = series
        .with_meta("preset", cfg.preset.name())
        .with_meta("units", units)
        .with_meta("gamma", params.gamma)
        .with_meta("kt", params.kt)
        .with_meta("kt_system", params.kt_system.unwrap_or(params.kt))
        .with_meta("potential", potential_meta(&potential))
        .with_meta("q0", cfg.packet.q0)
        .with_meta("sigma0", cfg.packet.sigma0)
        .with_meta("dt", cfg.dt)
        .with_meta("t_end", cfg.t_end);
    if let Some(v0) = cfg.packet.v0 {
        s = s.with_meta("v0", v0);
    }
    s
}

fn width_mode(cfg: &ExperimentConfig) -> WidthMode {
    if cfg.classical_mode {
        WidthMode::Classical
    } else {
        WidthMode::Quantum
    }
}

fn ensemble(cfg: &ExperimentConfig, point: &RunPoint, mode: WidthMode) -> Result<TrajectoryEnsemble, Error> {
    let mut spec = EnsembleSpec::new(point.params, point.potential, point.q0, point.sigma0)
        .with_n(cfg.n_traj)
        .with_seed(cfg.seed)
        .with_time(point.dt, point.t_end)
        .with_width_mode(mode);
    if let Some(v0) = point.v0 {
        spec = spec.with_velocity(VelocityInit::Fixed(v0));
    }
    TrajectoryEnsemble::build(spec)
}

fn omega(point: &RunPoint) -> f64 {
    match point.potential {
        Potential::ParabolicRepeller { omega } => omega,
        _ => 0.0,
    }
}

fn barrier(point: &RunPoint) -> Result<BarrierProblem, Error> {
    BarrierProblem::new(point.params, omega(point), point.q0, point.sigma0)
}

fn transport_mode(point: &RunPoint, noisy: bool) -> TransportMode {
    match point.v0 {
        Some(v0) => TransportMode::Pure { v0 },
        None if noisy => TransportMode::StochasticThermal,
        None => TransportMode::ThermalDissipative,
    }
}

fn output_times(point: &RunPoint, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| point.t_end * k as f64 / (points - 1) as f64)
        .collect()
}

/// Scales a natural-unit series to config units: `x / axis_scale`,
/// `value / value_scale`.
fn rescale(series: ObservableSeries, axis_scale: f64, value_scale: f64) -> ObservableSeries {
    ObservableSeries {
        times: series.times.iter().map(|t| t / axis_scale).collect(),
        values: series.values.iter().map(|v| v / value_scale).collect(),
        stderr: series.stderr.iter().map(|e| e / value_scale).collect(),
        ..series
    }
}

/// Time curves of one sweep point.
fn primary(
    cfg: &ExperimentConfig,
    obs: Observable,
    point: &RunPoint,
    s: Scales,
) -> Result<Vec<(String, ObservableSeries)>, RunError> {
    let seed = cfg.seed;
    Ok(match obs {
        Observable::Uncertainty => {
            let width = integrate_pinney(&point.params, &Potential::Free, point.sigma0, point.dt, point.t_end, width_mode(cfg))?;
            let steps = output_steps(&width.grid, cfg.points);
            let times: Vec<f64> = steps.iter().map(|&i| width.grid.t(i)).collect();
            let values = times
                .iter()
                .map(|&t| slb::analytics::uncertainty_product(&point.params, &width, t))
                .collect::<Result<Vec<_>, _>>()?;
            let hbar = point.params.hbar;
            let series = ObservableSeries::exact("uncertainty_product", "t", times, values, seed);
            vec![(String::new(), rescale(series, s.time, hbar).with_meta("method", "analytic"))]
        }
        Observable::Diffusion => {
            let ens = ensemble(cfg, point, width_mode(cfg))?;
            let est = estimate_msd_diffusion(&ens, cfg.points)?;
            let l2 = s.length * s.length;
            let d = l2 / s.time;
            vec![
                ("msd-classical".into(), rescale(est.classical, s.time, l2)),
                ("msd-quantum".into(), rescale(est.quantum, s.time, l2)),
                ("diffusion-classical".into(), rescale(est.diffusion_classical, s.time, d)),
                ("diffusion-quantum".into(), rescale(est.diffusion_quantum, s.time, d)),
            ]
        }
        Observable::Vacf => {
            let ens = ensemble(cfg, point, width_mode(cfg))?;
            let est = estimate_vacf(&ens, cfg.points)?;
            let v2 = (s.length / s.time).powi(2);
            let mut series = rescale(est.series, s.time, v2)
                .with_meta("integral", est.integral.value / (v2 * s.time))
                .with_meta("integral_stderr", est.integral.stderr / (v2 * s.time));
            if let Some(h) = est.half_life {
                series = series
                    .with_meta("half_life", h.value / s.time)
                    .with_meta("half_life_stderr", h.stderr / s.time);
            }
            vec![(String::new(), series)]
        }
        Observable::ArrivalProfile => {
            let modes: &[(WidthMode, &str)] = if cfg.classical_mode {
                &[(WidthMode::Classical, "classical")]
            } else {
                &[(WidthMode::Quantum, "quantum"), (WidthMode::Classical, "classical")]
            };
            let direction = if point.q0 > point.x_d { Direction::Down } else { Direction::Up };
            let mut out = Vec::new();
            for &(mode, name) in modes {
                let ens = ensemble(cfg, point, mode)?;
                let profile = arrival_profile(&ens, point.x_d, direction, &point.offsets)?;
                let xs: Vec<f64> = point.offsets.iter().map(|d| (point.q0 + d) / s.length).collect();
                let estimates: Vec<Estimate> = profile.bins.iter().map(|b| b.mean).collect();
                let never = profile.bins.iter().map(|b| b.never_fraction()).fold(0.0, f64::max);
                let series = ObservableSeries::from_estimates(format!("arrival_time_{name}"), "x0", xs, &estimates, seed);
                let series = rescale(series, 1.0, s.time)
                    .with_meta("x_d", cfg.region.x_d)
                    .with_meta("born_weighted_mean", profile.born_weighted_mean(point.sigma0) / s.time)
                    .with_meta("max_never_fraction", never);
                out.push((name.to_string(), series));
            }
            out
        }
        Observable::ArrivalDistribution => {
            let times = output_times(point, cfg.points);
            let dist = barrier(point)?.arrival_distribution_current(transport_mode(point, false), point.x_d, &times)?;
            let series = ObservableSeries::exact("arrival_density", "t", dist.times, dist.density, seed);
            let series = rescale(series, s.time, 1.0 / s.time)
                .with_meta("method", "analytic")
                .with_meta("x_d", cfg.region.x_d)
                .with_meta("mean_time", dist.mean_time / s.time)
                .with_meta("skipped_nodes", dist.skipped_nodes);
            vec![(String::new(), series)]
        }
        Observable::Transmission => {
            let problem = barrier(point)?;
            let mode = transport_mode(point, true);
            let times = output_times(point, cfg.points);
            let values = times
                .iter()
                .map(|&t| problem.transmission_probability(mode, t))
                .collect::<Result<Vec<_>, _>>()?;
            let stationary = problem.stationary_transmission(mode)?;
            let series = ObservableSeries::exact("transmission_probability", "t", times, values, seed);
            vec![(
                String::new(),
                rescale(series, s.time, 1.0)
                    .with_meta("method", "analytic")
                    .with_meta("stationary", stationary),
            )]
        }
        Observable::Dwell | Observable::Transit => Vec::new(),
    })
}

/// Scalar results of one point, in config units, with their file suffixes.
fn scalars(cfg: &ExperimentConfig, obs: Observable, point: &RunPoint, s: Scales) -> Result<Vec<(&'static str, Estimate)>, RunError> {
    let exact = |value: f64| Estimate { value, stderr: 0.0, n: 0 };
    Ok(match obs {
        Observable::ArrivalDistribution => {
            let times = output_times(point, cfg.points);
            let dist = barrier(point)?.arrival_distribution_current(transport_mode(point, false), point.x_d, &times)?;
            vec![("mean-arrival", exact(dist.mean_time / s.time))]
        }
        Observable::Transmission => {
            let p = barrier(point)?.stationary_transmission(transport_mode(point, true))?;
            vec![("stationary", exact(p))]
        }
        Observable::Dwell => {
            let tau = barrier(point)?.dwell_time(transport_mode(point, true), point.x1, point.x2)?;
            vec![("", exact(tau / s.time))]
        }
        Observable::Transit => {
            let ens = ensemble(cfg, point, width_mode(cfg))?;
            let split = split_by_final_side(&ens, point.x1, point.x2, 0.0)?;
            let t = |e: Option<Estimate>| {
                e.map_or(Estimate { value: f64::NAN, stderr: f64::NAN, n: 0 }, |e| Estimate {
                    value: e.value / s.time,
                    stderr: e.stderr / s.time,
                    n: e.n,
                })
            };
            vec![
                ("p-tr", split.p_tr),
                ("tau-tr", t(split.tau_tr)),
                ("tau-ref", t(split.tau_ref)),
                ("dwell", t(Some(split.dwell.mean))),
            ]
        }
        _ => Vec::new(),
    })
}

fn summary(
    cfg: &ExperimentConfig,
    obs: Observable,
    group: &[(SweepKey, f64)],
    s: Scales,
) -> Result<Vec<Curve>, RunError> {
    let (key, values) = match &cfg.scan {
        Some(scan) => (scan.key, scan.values.clone()),
        None => {
            // a single row at the curve's own temperature
            let kt = group.iter().find(|(k, _)| *k == SweepKey::Kt).map_or(cfg.params.kt, |p| p.1);
            (SweepKey::Kt, vec![kt])
        }
    };
    let mut rows: Vec<(&'static str, Vec<Estimate>)> = Vec::new();
    for &v in &values {
        let mut label = group.to_vec();
        label.retain(|(k, _)| *k != key);
        label.push((key, v));
        let point = cfg.point(&label);
        for (k, (suffix, est)) in scalars(cfg, obs, &point, s)?.into_iter().enumerate() {
            if rows.len() <= k {
                rows.push((suffix, Vec::new()));
            }
            rows[k].1.push(est);
        }
    }
    Ok(rows
        .into_iter()
        .map(|(suffix, estimates)| {
            let name = if suffix.is_empty() { obs.name().to_string() } else { format!("{}_{suffix}", obs.name()) };
            let series = ObservableSeries::from_estimates(name, key.name(), values.clone(), &estimates, cfg.seed);
            let series = if obs == Observable::Transit { series } else { series.with_meta("method", "analytic") };
            Curve {
                stem: stem(cfg, group, suffix),
                series: tag_label(series, cfg, group),
            }
        })
        .collect())
}
