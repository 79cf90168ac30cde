use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slb::config::{ExperimentConfig, PresetKind, SweepKey};
use slb::Error;
use slb_cli::{load_config, run, RunError};

/// Dissipative, fluctuating Gaussian wave packets: runs a preset or a config
/// file and writes one CSV per curve plus a manifest.
#[derive(Debug, Parser)]
#[command(name = "slb", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Preset to run, or to check a config file against.
    #[arg(long)]
    preset: Option<PresetKind>,

    /// TOML config file, or a manifest from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    n_traj: Option<usize>,

    /// Time step, in the config's units.
    #[arg(long)]
    dt: Option<f64>,

    /// Horizon, in the config's units.
    #[arg(long)]
    t_end: Option<f64>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Trajectories use the classical width (no quantum pressure).
    #[arg(long)]
    classical_mode: bool,

    /// Replaces a sweep list, e.g. `gamma=0.1,0.2`; `kt=` clears it.
    /// Repeatable. Keys: gamma, kt, kt_system, omega.
    #[arg(long, value_name = "KEY=V1,V2,...")]
    sweep: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Prints every preset with its defaults and the figure it reproduces.
    ListPresets,
}

fn parse_sweep(arg: &str) -> Result<(SweepKey, Vec<f64>), Error> {
    let (key, values) = arg
        .split_once('=')
        .ok_or_else(|| Error::config("sweep", format!("expected KEY=V1,V2,..., got {arg:?}")))?;
    let key: SweepKey = key.trim().parse()?;
    let values = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::config("sweep", format!("{v:?} is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((key, values))
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match (&cli.config, cli.preset) {
        (Some(path), preset) => {
            let cfg = load_config(path)?;
            if let Some(p) = preset.filter(|&p| p != cfg.preset) {
                return Err(RunError::Config(Error::config(
                    "preset",
                    format!("--preset {p} does not match the config file's preset {}", cfg.preset),
                )));
            }
            cfg
        }
        (None, Some(preset)) => ExperimentConfig::preset(preset),
        (None, None) => {
            return Err(RunError::Config(Error::config(
                "preset",
                "give --preset or --config (see `slb list-presets`)",
            )))
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.n_traj {
        cfg.n_traj = n;
    }
    if let Some(dt) = cli.dt {
        cfg.dt = dt;
    }
    if let Some(t_end) = cli.t_end {
        cfg.t_end = t_end;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.classical_mode |= cli.classical_mode;
    for arg in &cli.sweep {
        let (key, values) = parse_sweep(arg).map_err(RunError::Config)?;
        *cfg.sweep.get_mut(key) = values;
    }
    Ok(cfg)
}

fn list_presets() {
    for kind in PresetKind::ALL {
        let cfg = ExperimentConfig::preset(kind);
        println!("{kind}\n    {}", kind.description());
        println!(
            "    units = {:?}, n_traj = {}, dt = {}, t_end = {}, gamma = {}, kt = {}, potential = {:?}",
            cfg.units, cfg.n_traj, cfg.dt, cfg.t_end, cfg.params.gamma, cfg.params.kt, cfg.potential
        );
        if kind != PresetKind::Custom {
            println!(
                "    q0 = {}, x_d = {}, interval = [{}, {}]",
                cfg.packet.q0, cfg.region.x_d, cfg.region.x1, cfg.region.x2
            );
        }
        for key in SweepKey::ALL {
            let values = cfg.sweep.get(key);
            if !values.is_empty() {
                println!("    sweep {} = {values:?}", key.name());
            }
        }
        if let Some(scan) = &cfg.scan {
            println!("    scan {} over {} values", scan.key.name(), scan.values.len());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(Command::ListPresets) = cli.command {
        list_presets();
        return ExitCode::SUCCESS;
    }
    if let Err(e) = slb::init_workers_from_env() {
        eprintln!("{}", RunError::Config(e));
        return ExitCode::from(2);
    }
    let result = resolve(&cli).and_then(run);
    match result {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.files {
                println!("{}", f.display());
            }
            println!("{}", report.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
