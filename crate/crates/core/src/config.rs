//! Experiment configuration: the TOML schema read by the runner, the preset
//! catalog and validation.
//!
//! A config is written in one unit system, either natural units or bar
//! units (lengths in `sigma0`, times in `2 m sigma0^2 / hbar`, energies in
//! `hbar^2 / (4 m sigma0^2)`). [`ExperimentConfig::run_points`] converts to
//! natural units, which is all the numerics ever see.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::physics::{DimensionlessUnits, PhysicalParams, Potential};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetKind {
    Uncertainty,
    BrownianBohmian,
    FallingArrival,
    RepellerArrival,
    Transmission,
    Dwell,
    Custom,
}

impl PresetKind {
    pub const ALL: [PresetKind; 7] = [
        PresetKind::Uncertainty,
        PresetKind::BrownianBohmian,
        PresetKind::FallingArrival,
        PresetKind::RepellerArrival,
        PresetKind::Transmission,
        PresetKind::Dwell,
        PresetKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetKind::Uncertainty => "uncertainty",
            PresetKind::BrownianBohmian => "brownian-bohmian",
            PresetKind::FallingArrival => "falling-arrival",
            PresetKind::RepellerArrival => "repeller-arrival",
            PresetKind::Transmission => "transmission",
            PresetKind::Dwell => "dwell",
            PresetKind::Custom => "custom",
        }
    }

    /// What the preset computes and which published figure it corresponds to.
    pub fn description(self) -> &'static str {
        match self {
            PresetKind::Uncertainty => "free-packet uncertainty product U(t) per friction (Fig. 1, left panel)",
            PresetKind::BrownianBohmian => {
                "classical and quantum MSD and D(t) of a free Brownian-Bohmian ensemble (Fig. 2)"
            }
            PresetKind::FallingArrival => {
                "mean arrival time at the ground versus initial position, quantum and classical (Fig. 3)"
            }
            PresetKind::RepellerArrival => {
                "arrival-time distribution behind a parabolic repeller per system temperature (Fig. 4)"
            }
            PresetKind::Transmission => "thermal transmission probability versus time (Fig. 5, left panel)",
            PresetKind::Dwell => "dwell time in [-1, 1] versus temperature per friction (Fig. 6)",
            PresetKind::Custom => "any potential and observable given in the config file",
        }
    }

    /// Default configuration of the preset.
    pub fn defaults(self) -> ExperimentConfig {
        let base = ExperimentConfig::base(self);
        match self {
            PresetKind::Uncertainty => ExperimentConfig {
                t_end: 100.0,
                points: 1001,
                params: ParamsConfig::new(0.1, 0.0),
                sweep: SweepConfig {
                    gamma: vec![0.1, 0.12, 0.15, 0.18],
                    ..SweepConfig::default()
                },
                ..base
            },
            PresetKind::BrownianBohmian => ExperimentConfig {
                t_end: 250.0,
                points: 251,
                params: ParamsConfig::new(0.2, 0.5),
                sweep: SweepConfig {
                    kt: vec![0.2, 0.5],
                    ..SweepConfig::default()
                },
                ..base
            },
            PresetKind::FallingArrival => ExperimentConfig {
                t_end: 1500.0,
                params: ParamsConfig::new(0.2, 0.0),
                potential: Potential::Linear { g: 0.05 },
                packet: PacketConfig {
                    q0: 10.0,
                    ..PacketConfig::default()
                },
                region: RegionConfig {
                    x_d: 0.0,
                    offsets: (-12..=12).map(|k| 0.25 * k as f64).collect(),
                    ..RegionConfig::default()
                },
                sweep: SweepConfig {
                    kt: vec![0.0, 0.1, 1.0],
                    ..SweepConfig::default()
                },
                ..base
            },
            PresetKind::RepellerArrival => ExperimentConfig {
                units: UnitSystem::Bar,
                t_end: 200.0,
                points: 2000,
                params: ParamsConfig {
                    kt_system: Some(0.0),
                    ..ParamsConfig::new(0.0, 0.0)
                },
                potential: Potential::ParabolicRepeller { omega: 0.05 },
                packet: PacketConfig {
                    q0: -20.0,
                    ..PacketConfig::default()
                },
                region: RegionConfig {
                    x_d: 20.0,
                    ..RegionConfig::default()
                },
                sweep: SweepConfig {
                    kt_system: vec![0.0, 1.0, 5.0],
                    omega: vec![0.05, 0.1],
                    ..SweepConfig::default()
                },
                scan: Some(ScanConfig {
                    key: SweepKey::KtSystem,
                    values: (0..=20).map(|k| 0.5 * k as f64).collect(),
                }),
                ..base
            },
            PresetKind::Transmission => ExperimentConfig {
                units: UnitSystem::Bar,
                t_end: 200.0,
                points: 2001,
                params: ParamsConfig::new(0.1, 10.0),
                potential: Potential::ParabolicRepeller { omega: 0.1 },
                packet: PacketConfig {
                    q0: -20.0,
                    ..PacketConfig::default()
                },
                sweep: SweepConfig {
                    kt: vec![10.0, 30.0, 50.0, 80.0],
                    ..SweepConfig::default()
                },
                ..base
            },
            PresetKind::Dwell => ExperimentConfig {
                units: UnitSystem::Bar,
                params: ParamsConfig::new(0.05, 0.0),
                potential: Potential::ParabolicRepeller { omega: 0.1 },
                packet: PacketConfig {
                    q0: -20.0,
                    ..PacketConfig::default()
                },
                sweep: SweepConfig {
                    gamma: vec![0.05, 0.1, 0.2],
                    ..SweepConfig::default()
                },
                scan: Some(ScanConfig {
                    key: SweepKey::Kt,
                    values: (0..=40).map(|k| 0.5 * k as f64).collect(),
                }),
                ..base
            },
            PresetKind::Custom => base,
        }
    }
}

impl fmt::Display for PresetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            Error::config("preset", format!("unknown preset {s:?}, expected one of {}", names.join(", ")))
        })
    }
}

/// The quantity an experiment produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// Analytic `U(t)` of the free packet.
    Uncertainty,
    /// Monte-Carlo MSD and `D(t)`, classical and quantum.
    Diffusion,
    /// Monte-Carlo velocity autocorrelation.
    Vacf,
    /// Monte-Carlo mean arrival time per initial offset.
    ArrivalProfile,
    /// Current-based arrival-time density behind the repeller.
    ArrivalDistribution,
    /// Analytic transmission probability versus time.
    Transmission,
    /// Analytic dwell time in `[x1, x2]`.
    Dwell,
    /// Monte-Carlo transmission fraction, dwell and split times.
    Transit,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Uncertainty => "uncertainty",
            Observable::Diffusion => "diffusion",
            Observable::Vacf => "vacf",
            Observable::ArrivalProfile => "arrival-profile",
            Observable::ArrivalDistribution => "arrival-distribution",
            Observable::Transmission => "transmission",
            Observable::Dwell => "dwell",
            Observable::Transit => "transit",
        }
    }

    fn needs_repeller(self) -> bool {
        matches!(
            self,
            Observable::ArrivalDistribution | Observable::Transmission | Observable::Dwell | Observable::Transit
        )
    }

    fn needs_free(self) -> bool {
        matches!(self, Observable::Uncertainty | Observable::Diffusion | Observable::Vacf)
    }

    /// Keys a scan may run over for this observable; empty when scans do
    /// not apply.
    pub fn scan_keys(self) -> &'static [SweepKey] {
        match self {
            Observable::ArrivalDistribution => &[SweepKey::KtSystem, SweepKey::Omega],
            Observable::Transmission | Observable::Dwell | Observable::Transit => {
                &[SweepKey::Kt, SweepKey::KtSystem, SweepKey::Gamma, SweepKey::Omega]
            }
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitSystem {
    #[default]
    Natural,
    /// Lengths in `sigma0`, times in `2 m sigma0^2 / hbar`, energies in
    /// `hbar^2 / (4 m sigma0^2)`.
    Bar,
}

/// Physical parameters as written in the config. `kt_system` follows `kt`
/// unless given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub kt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kt_system: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self::new(0.0, 0.0)
    }
}

impl ParamsConfig {
    pub fn new(gamma: f64, kt: f64) -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            gamma,
            kt,
            kt_system: None,
        }
    }

    fn physical(&self) -> PhysicalParams {
        PhysicalParams {
            mass: self.mass,
            hbar: self.hbar,
            gamma: self.gamma,
            kt: self.kt,
            kt_system: self.kt_system.unwrap_or(self.kt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    #[serde(default)]
    pub q0: f64,
    #[serde(default = "one")]
    pub sigma0: f64,
    /// Fixed initial center velocity for every member instead of
    /// Maxwell-Boltzmann sampling at `kt_system`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            q0: 0.0,
            sigma0: 1.0,
            v0: None,
        }
    }
}

/// Detector and interval positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    #[serde(default)]
    pub x_d: f64,
    #[serde(default = "minus_one")]
    pub x1: f64,
    #[serde(default = "one")]
    pub x2: f64,
    /// Initial offsets `x0 - q0` of the arrival profile.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offsets: Vec<f64>,
}

fn minus_one() -> f64 {
    -1.0
}

impl Default for RegionConfig {
    fn default() -> Self {
        Self {
            x_d: 0.0,
            x1: -1.0,
            x2: 1.0,
            offsets: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKey {
    Gamma,
    Kt,
    KtSystem,
    Omega,
}

impl SweepKey {
    pub const ALL: [SweepKey; 4] = [SweepKey::Gamma, SweepKey::Kt, SweepKey::KtSystem, SweepKey::Omega];

    pub fn name(self) -> &'static str {
        match self {
            SweepKey::Gamma => "gamma",
            SweepKey::Kt => "kt",
            SweepKey::KtSystem => "kt_system",
            SweepKey::Omega => "omega",
        }
    }
}

impl FromStr for SweepKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("sweep", format!("unknown sweep key {s:?}, expected gamma, kt, kt_system or omega")))
    }
}

/// One curve per element of the cartesian product of the non-empty lists.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kt: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kt_system: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega: Vec<f64>,
}

impl SweepConfig {
    pub fn get(&self, key: SweepKey) -> &Vec<f64> {
        match key {
            SweepKey::Gamma => &self.gamma,
            SweepKey::Kt => &self.kt,
            SweepKey::KtSystem => &self.kt_system,
            SweepKey::Omega => &self.omega,
        }
    }

    pub fn get_mut(&mut self, key: SweepKey) -> &mut Vec<f64> {
        match key {
            SweepKey::Gamma => &mut self.gamma,
            SweepKey::Kt => &mut self.kt,
            SweepKey::KtSystem => &mut self.kt_system,
            SweepKey::Omega => &mut self.omega,
        }
    }

    pub fn is_empty(&self) -> bool {
        SweepKey::ALL.iter().all(|&k| self.get(k).is_empty())
    }
}

/// A scalar result (stationary transmission, dwell time, mean arrival)
/// tabulated against one parameter inside every curve of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: PresetKind,
    /// Required for `custom`; other presets fix their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n")]
    pub n_traj: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Output samples per time curve.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Trajectory observables use the classical width (no quantum pressure).
    #[serde(default)]
    pub classical_mode: bool,
    /// Physical initial width in Angstrom for electrons. Only used to report
    /// the SI size of the bar units; the numerics never see it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electron_sigma0_angstrom: Option<f64>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default = "free")]
    pub potential: Potential,
    #[serde(default)]
    pub packet: PacketConfig,
    #[serde(default)]
    pub region: RegionConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

fn default_n() -> usize {
    5000
}
fn default_dt() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    10.0
}
fn default_points() -> usize {
    501
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn free() -> Potential {
    Potential::Free
}

/// Initial width used by the bar-unit presets: electrons, 0.4 Angstrom.
pub const ELECTRON_SIGMA0_ANGSTROM: f64 = 0.4;

impl ExperimentConfig {
    fn base(preset: PresetKind) -> Self {
        Self {
            preset,
            observable: None,
            units: UnitSystem::Natural,
            seed: 0,
            n_traj: default_n(),
            dt: default_dt(),
            t_end: default_t_end(),
            points: default_points(),
            out: default_out(),
            classical_mode: false,
            electron_sigma0_angstrom: None,
            params: ParamsConfig::default(),
            potential: Potential::Free,
            packet: PacketConfig::default(),
            region: RegionConfig::default(),
            sweep: SweepConfig::default(),
            scan: None,
        }
        .with_electron_scale()
    }

    fn with_electron_scale(mut self) -> Self {
        if self.units == UnitSystem::Bar {
            self.electron_sigma0_angstrom = Some(ELECTRON_SIGMA0_ANGSTROM);
        }
        self
    }

    pub fn preset(kind: PresetKind) -> Self {
        kind.defaults().with_electron_scale()
    }

    /// Parses a config file. A `[run]` table, as written into manifests, is
    /// ignored so that a manifest reruns as a config.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("config", e.to_string()))?;
        table.remove("run");
        table.try_into().map_err(|e: toml::de::Error| Error::config("config", e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn observable(&self) -> Option<Observable> {
        self.observable.or(match self.preset {
            PresetKind::Uncertainty => Some(Observable::Uncertainty),
            PresetKind::BrownianBohmian => Some(Observable::Diffusion),
            PresetKind::FallingArrival => Some(Observable::ArrivalProfile),
            PresetKind::RepellerArrival => Some(Observable::ArrivalDistribution),
            PresetKind::Transmission => Some(Observable::Transmission),
            PresetKind::Dwell => Some(Observable::Dwell),
            PresetKind::Custom => None,
        })
    }

    /// Natural-unit scales of the config's units.
    pub fn scales(&self) -> Scales {
        match self.units {
            UnitSystem::Natural => Scales::IDENTITY,
            UnitSystem::Bar => {
                let u = DimensionlessUnits::new(1.0, self.params.mass, self.params.hbar);
                Scales {
                    length: u.length(),
                    time: u.time(),
                    energy: u.energy(),
                }
            }
        }
    }

    /// The sweep expanded to one run per curve, in natural units.
    pub fn run_points(&self) -> Vec<RunPoint> {
        let keys: Vec<SweepKey> = SweepKey::ALL.into_iter().filter(|&k| !self.sweep.get(k).is_empty()).collect();
        let mut combos: Vec<Vec<(SweepKey, f64)>> = vec![Vec::new()];
        for &key in &keys {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    self.sweep.get(key).iter().map(move |&v| {
                        let mut next = c.clone();
                        next.push((key, v));
                        next
                    })
                })
                .collect();
        }
        combos.into_iter().map(|c| self.point(&c)).collect()
    }

    /// Run with the given `(key, value)` overrides applied, in config units.
    pub fn point(&self, overrides: &[(SweepKey, f64)]) -> RunPoint {
        let mut params = self.params;
        let mut potential = self.potential;
        for &(key, v) in overrides {
            match key {
                SweepKey::Gamma => params.gamma = v,
                SweepKey::Kt => params.kt = v,
                SweepKey::KtSystem => params.kt_system = Some(v),
                SweepKey::Omega => {
                    potential = match potential {
                        Potential::ParabolicRepeller { .. } => Potential::ParabolicRepeller { omega: v },
                        Potential::Harmonic { .. } => Potential::Harmonic { omega: v },
                        other => other,
                    }
                }
            }
        }
        let s = self.scales();
        let mut physical = params.physical();
        physical.gamma /= s.time;
        physical.kt *= s.energy;
        physical.kt_system *= s.energy;
        let potential = match potential {
            Potential::Free => Potential::Free,
            Potential::Linear { g } => Potential::Linear {
                g: g * s.length / (s.time * s.time),
            },
            Potential::ParabolicRepeller { omega } => Potential::ParabolicRepeller { omega: omega / s.time },
            Potential::Harmonic { omega } => Potential::Harmonic { omega: omega / s.time },
        };
        RunPoint {
            label: overrides.to_vec(),
            params: physical,
            potential,
            q0: self.packet.q0 * s.length,
            sigma0: self.packet.sigma0 * s.length,
            v0: self.packet.v0.map(|v| v * s.length / s.time),
            x_d: self.region.x_d * s.length,
            x1: self.region.x1 * s.length,
            x2: self.region.x2 * s.length,
            offsets: self.region.offsets.iter().map(|d| d * s.length).collect(),
            dt: self.dt * s.time,
            t_end: self.t_end * s.time,
        }
    }
}

/// Size of one config unit in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub length: f64,
    pub time: f64,
    pub energy: f64,
}

impl Scales {
    pub const IDENTITY: Scales = Scales {
        length: 1.0,
        time: 1.0,
        energy: 1.0,
    };
}

/// One curve of an experiment, in natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPoint {
    /// Sweep values defining the curve, in config units.
    pub label: Vec<(SweepKey, f64)>,
    pub params: PhysicalParams,
    pub potential: Potential,
    pub q0: f64,
    pub sigma0: f64,
    pub v0: Option<f64>,
    pub x_d: f64,
    pub x1: f64,
    pub x2: f64,
    pub offsets: Vec<f64>,
    pub dt: f64,
    pub t_end: f64,
}

impl RunPoint {
    /// `gamma0.1_kt5`, or an empty string for an unswept run.
    pub fn tag(&self) -> String {
        self.label
            .iter()
            .map(|(k, v)| format!("{}{v}", k.name()))
            .collect::<Vec<_>>()
            .join("_")
    }
}

/// A config that passed [`validate_config`], with non-fatal findings.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    pub config: ExperimentConfig,
    pub warnings: Vec<String>,
}

/// Checks every invariant of the config and reports each violation by field.
pub fn validate_config(cfg: ExperimentConfig) -> Result<ValidatedConfig> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    macro_rules! err {
        ($field:expr, $msg:expr) => {
            errors.push(FieldError::new($field, $msg))
        };
    }

    let p = cfg.params;
    for (name, v, positive) in [
        ("params.mass", p.mass, true),
        ("params.hbar", p.hbar, true),
        ("params.gamma", p.gamma, false),
        ("params.kt", p.kt, false),
        ("params.kt_system", p.kt_system.unwrap_or(0.0), false),
    ] {
        let field = name.trim_start_matches("params.");
        if positive && !(v > 0.0 && v.is_finite()) {
            err!(name, format!("{field} must be > 0"));
        } else if !positive && !(v >= 0.0 && v.is_finite()) {
            err!(name, format!("{field} must be >= 0"));
        }
    }
    if cfg.n_traj < 1 {
        err!("n_traj", "n_traj must be >= 1".to_string());
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        err!("dt", "dt must be > 0".to_string());
    }
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        err!("t_end", "t_end must be > 0".to_string());
    } else if cfg.dt > cfg.t_end {
        err!("dt", "dt must not exceed t_end".to_string());
    }
    if cfg.points < 2 {
        err!("points", "points must be >= 2".to_string());
    }
    if cfg.seed > i64::MAX as u64 {
        err!("seed", format!("seed must be <= {}", i64::MAX));
    }
    let s0 = cfg.packet.sigma0;
    if !(s0 > 0.0 && s0.is_finite()) {
        err!("packet.sigma0", "sigma0 must be > 0".to_string());
    } else if cfg.units == UnitSystem::Bar && s0 != 1.0 {
        err!("packet.sigma0", "sigma0 must be 1 in bar units, where it is the length unit".to_string());
    }
    if !cfg.packet.q0.is_finite() {
        err!("packet.q0", "q0 must be finite".to_string());
    }
    if cfg.packet.v0.is_some_and(|v| !v.is_finite()) {
        err!("packet.v0", "v0 must be finite".to_string());
    }
    if let Some(a) = cfg.electron_sigma0_angstrom {
        if !(a > 0.0 && a.is_finite()) {
            err!("electron_sigma0_angstrom", "electron_sigma0_angstrom must be > 0".to_string());
        }
    }
    match cfg.potential {
        Potential::Linear { g } if !g.is_finite() => err!("potential.g", "g must be finite".to_string()),
        Potential::ParabolicRepeller { omega } | Potential::Harmonic { omega } if !(omega >= 0.0 && omega.is_finite()) => {
            err!("potential.omega", "omega must be >= 0".to_string())
        }
        _ => {}
    }
    let r = &cfg.region;
    if ![r.x_d, r.x1, r.x2].iter().all(|x| x.is_finite()) || r.offsets.iter().any(|d| !d.is_finite()) {
        err!("region", "region positions must be finite".to_string());
    }
    if r.x1 > r.x2 {
        err!("region.x1", "x1 must not exceed x2".to_string());
    }

    let has_omega = matches!(cfg.potential, Potential::ParabolicRepeller { .. } | Potential::Harmonic { .. });
    let mut lists: Vec<(String, SweepKey, &[f64])> = SweepKey::ALL
        .iter()
        .map(|&k| (format!("sweep.{}", k.name()), k, cfg.sweep.get(k).as_slice()))
        .collect();
    if let Some(scan) = &cfg.scan {
        lists.push(("scan.values".into(), scan.key, &scan.values));
    }
    for (field, key, values) in lists {
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            err!(field.clone(), format!("{field} values must be finite and >= 0"));
        }
        if key == SweepKey::Omega && !values.is_empty() && !has_omega {
            err!(field.clone(), format!("{field} needs a potential with a frequency"));
        }
    }

    match cfg.observable() {
        None => err!("observable", "the custom preset needs an observable".to_string()),
        Some(obs) => {
            if obs.needs_repeller() && !matches!(cfg.potential, Potential::ParabolicRepeller { .. }) {
                err!("potential", format!("{} needs the parabolic-repeller potential", obs.name()));
            }
            if obs.needs_free() && cfg.potential != Potential::Free {
                err!("potential", format!("{} needs the free potential", obs.name()));
            }
            if obs == Observable::ArrivalProfile && r.offsets.is_empty() {
                err!("region.offsets", "arrival-profile needs at least one offset".to_string());
            }
            if obs == Observable::ArrivalDistribution {
                let noisy = |gamma: f64, kt: f64| gamma > 0.0 && kt > 0.0;
                let gammas = if cfg.sweep.gamma.is_empty() { vec![p.gamma] } else { cfg.sweep.gamma.clone() };
                let kts = if cfg.sweep.kt.is_empty() { vec![p.kt] } else { cfg.sweep.kt.clone() };
                if gammas.iter().any(|&g| kts.iter().any(|&t| noisy(g, t))) {
                    err!("params.kt", "arrival-distribution needs a noiseless ensemble (gamma = 0 or kt = 0)".to_string());
                }
            }
            if let Some(scan) = &cfg.scan {
                if !obs.scan_keys().contains(&scan.key) {
                    err!("scan.key", format!("{} cannot scan over {}", obs.name(), scan.key.name()));
                }
                if scan.values.is_empty() {
                    err!("scan.values", "scan needs at least one value".to_string());
                }
            }
            if obs.needs_repeller() && cfg.packet.q0 + 3.0 * s0 >= 0.0 {
                warnings.push(format!(
                    "packet is not well localized left of the barrier top (q0 + 3 sigma0 = {} >= 0)",
                    cfg.packet.q0 + 3.0 * s0
                ));
            }
        }
    }

    if errors.is_empty() {
        Ok(ValidatedConfig { config: cfg, warnings })
    } else {
        Err(Error::Config(errors))
    }
}
