use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use slb::config::{ExperimentConfig, PresetKind};
use slb_cli::{load_config, run, MANIFEST};

fn slb(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slb"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("SLB_THREADS", n),
        None => cmd.env_remove("SLB_THREADS"),
    };
    cmd.output().unwrap()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn rows(bytes: &[u8]) -> Vec<Vec<f64>> {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const SMALL_MC: [&str; 8] = ["--preset", "brownian-bohmian", "--n-traj", "300", "--t-end", "5", "--seed", "17"];

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = SMALL_MC.to_vec();
    let pa = a.path().to_str().unwrap();
    args.extend(["--out", pa]);
    assert!(slb(&args, Some("1")).status.success());
    let mut args = SMALL_MC.to_vec();
    let pb = b.path().to_str().unwrap();
    args.extend(["--out", pb]);
    assert!(slb(&args, Some("3")).status.success());
    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    assert_eq!(fa.len(), 8);
    assert_eq!(fa, fb);
}

#[test]
fn manifest_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(PresetKind::FallingArrival);
    cfg.n_traj = 200;
    cfg.t_end = 120.0;
    cfg.seed = 99;
    cfg.sweep.kt = vec![0.0, 0.1];
    cfg.region.offsets = vec![-1.0, 0.0, 1.0];
    cfg.out = first.path().to_path_buf();
    let report = run(cfg.clone()).unwrap();
    assert_eq!(report.files.len(), 4);

    let loaded = load_config(&report.manifest).unwrap();
    assert_eq!(loaded, cfg);
    let second = tempfile::tempdir().unwrap();
    let manifest = second.path().join("from_manifest.toml");
    let text = fs::read_to_string(&report.manifest)
        .unwrap()
        .replace(first.path().to_str().unwrap(), second.path().to_str().unwrap());
    fs::write(&manifest, text).unwrap();
    let out = slb(&["--config", manifest.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_files(first.path()), csv_files(second.path()));
}

#[test]
fn dwell_sweep_writes_temperature_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = slb(
        &["--preset", "dwell", "--sweep", "gamma=0.05,0.1,0.2", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert!(out.status.success());
    let files = csv_files(dir.path());
    let names: Vec<_> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["dwell_gamma0.05.csv", "dwell_gamma0.1.csv", "dwell_gamma0.2.csv"]);
    let text = String::from_utf8_lossy(&files[0].1);
    assert!(text.lines().any(|l| l == "kt,value,stderr"));
    let r = rows(&files[0].1);
    assert_eq!(r[0][0], 0.0);
    assert!((r[0][1] - 0.0402).abs() < 0.02 * 0.0402);
    assert!(fs::read_to_string(dir.path().join(MANIFEST)).unwrap().contains("[run]"));
}

#[test]
fn uncertainty_preset_writes_one_curve_per_friction() {
    let dir = tempfile::tempdir().unwrap();
    let out = slb(&["--preset", "uncertainty", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success());
    let files = csv_files(dir.path());
    assert_eq!(files.len(), 4);
    for (_, bytes) in &files {
        let r = rows(bytes);
        assert_eq!(r.len(), 1001);
        assert!(r.iter().all(|row| row[1] >= 0.5 - 1e-12));
    }
}

#[test]
fn empty_sweep_is_a_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = slb(&["--preset", "transmission", "--sweep", "kt=", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success());
    let names: Vec<_> = csv_files(dir.path()).into_iter().map(|f| f.0).collect();
    assert_eq!(names, ["transmission.csv"]);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "preset = \"uncertainty\"\n[packet]\nsigma0 = 0.0\n").unwrap();
    let out = slb(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("packet.sigma0: sigma0 must be > 0"));

    for args in [
        vec!["--preset", "nope"],
        vec![],
        vec!["--preset", "dwell", "--sweep", "beta=1"],
        vec!["--preset", "custom"],
    ] {
        assert_eq!(slb(&args, None).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(slb(&["--preset", "dwell"], Some("zero")).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("blowup.toml");
    fs::write(
        &cfg,
        format!(
            "preset = \"custom\"\nobservable = \"transit\"\nn_traj = 4\nt_end = 400.0\nout = {:?}\n\
             [potential]\nkind = \"parabolic-repeller\"\nomega = 10.0\n[packet]\nq0 = -20.0\n",
            dir.path().join("out")
        ),
    )
    .unwrap();
    let out = slb(&["--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
}

#[test]
fn list_presets_catalog() {
    let out = slb(&["list-presets"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for kind in PresetKind::ALL {
        assert!(text.lines().any(|l| l == kind.name()), "{kind} missing");
    }
    assert_eq!(text.matches("n_traj = 5000").count(), 7);
    assert!(text.contains("q0 = -20, x_d = 20"));
}
