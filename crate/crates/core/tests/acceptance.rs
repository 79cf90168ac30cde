//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the report is always printed.
//!
//! A criterion listed in `KNOWN_UNATTAINABLE` is reported but does not fail
//! the run; the run fails if such a criterion unexpectedly passes, so the
//! list stays honest.

use std::time::Instant;

use slb::analytics::{
    frictionless_width, thermal_width, trapezoid, uncertainty_product, BarrierProblem, TransportMode,
};
use slb::config::{ExperimentConfig, PresetKind, SweepKey};
use slb::dynamics::{analytic_center, integrate_langevin, integrate_pinney, Scheme, WidthMode};
use slb::noise::{NoiseStream, VelocitySampler};
use slb::observables::{
    arrival_profile, estimate_msd_diffusion, estimate_vacf, split_by_final_side, Direction, RunningStats,
};
use slb::trajectories::{EnsembleSpec, TrajectoryEnsemble, VelocityInit};
use slb::{PhysicalParams, Potential};

/// Criteria that cannot hold for the exact expressions; see the decisions
/// ledger for the analysis.
const KNOWN_UNATTAINABLE: &[&str] = &["2c"];

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        let known = KNOWN_UNATTAINABLE.contains(&id);
        let status = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, see ledger)",
            (false, false) => "FAIL",
        };
        println!("{status} [{id}] {detail}");
        self.lines.push((id.to_string(), pass));
    }

    fn info(&self, id: &str, detail: String) {
        println!("INFO [{id}] {detail}");
    }

    fn timed(&self, id: &str, start: Instant, budget_s: f64) -> bool {
        let s = start.elapsed().as_secs_f64();
        println!("TIME [{id}] {s:.1} s (budget {budget_s} s)");
        s < budget_s
    }
}

fn bar(kind: PresetKind, label: &[(SweepKey, f64)]) -> (slb::config::RunPoint, f64) {
    let cfg = ExperimentConfig::preset(kind);
    (cfg.point(label), cfg.scales().time)
}

fn barrier(point: &slb::config::RunPoint) -> BarrierProblem {
    let Potential::ParabolicRepeller { omega } = point.potential else { unreachable!() };
    BarrierProblem::new(point.params, omega, point.q0, point.sigma0).unwrap()
}

fn dwell(r: &mut Report) {
    let start = Instant::now();
    for (gamma, expected, tol) in [(0.05, 0.0402, 0.02 * 0.0402), (0.1, 0.0194, 0.02 * 0.0194), (0.2, 0.002, 5e-4)] {
        let (point, t_unit) = bar(PresetKind::Dwell, &[(SweepKey::Gamma, gamma), (SweepKey::Kt, 0.0)]);
        let tau = barrier(&point).dwell_time(TransportMode::StochasticThermal, point.x1, point.x2).unwrap() / t_unit;
        r.check(
            "1",
            (tau - expected).abs() <= tol,
            format!("dwell time, gamma_bar = {gamma}, T = 0: {tau:.5} vs {expected} (tol {tol:.1e})"),
        );
    }
    let ok = r.timed("1", start, 60.0);
    r.check("1", ok, "dwell runtime under 1 min".into());
}

fn transmission(r: &mut Report) {
    let start = Instant::now();
    for (omega, expected) in [(0.1, 0.192), (0.5, 2.5e-5)] {
        let (point, _) = bar(
            PresetKind::Transmission,
            &[(SweepKey::Gamma, 0.2), (SweepKey::Kt, 5.0), (SweepKey::Omega, omega)],
        );
        let p = barrier(&point).stationary_transmission(TransportMode::StochasticThermal).unwrap();
        r.check(
            if omega == 0.1 { "2a" } else { "2b" },
            ((p - expected) / expected).abs() <= 0.03,
            format!("stationary transmission, gamma_bar = 0.2, T_bar = 5, omega_bar = {omega}: {p:.4e} vs {expected} (3%)"),
        );
    }
    let (point, _) = bar(
        PresetKind::Transmission,
        &[(SweepKey::Gamma, 0.2), (SweepKey::Kt, 1e4), (SweepKey::Omega, 0.1)],
    );
    let p = barrier(&point).stationary_transmission(TransportMode::StochasticThermal).unwrap();
    let asymptote = 20.0 * 0.05 / (2.0 * std::f64::consts::PI * point.params.kt).sqrt();
    r.check(
        "2c",
        (p - 0.5).abs() <= 1e-3,
        format!(
            "high-T limit at T_bar = 1e4: |P - 0.5| = {:.2e} (tol 1e-3); leading correction |q0| omega / sqrt(2 pi kT) = {asymptote:.2e}",
            (p - 0.5).abs()
        ),
    );
    let ok = r.timed("2", start, 10.0);
    r.check("2", ok, "transmission runtime in seconds".into());
}

fn einstein(r: &mut Report) {
    let start = Instant::now();
    let (gamma, kt) = (0.2, 0.5);
    let t_end = 50.0 / gamma;
    let spec = EnsembleSpec::new(PhysicalParams::natural(gamma, kt), Potential::Free, 0.0, 1.0)
        .with_n(5000)
        .with_seed(2024)
        .with_time(0.01, t_end);
    let ens = TrajectoryEnsemble::build(spec).unwrap();
    let est = estimate_msd_diffusion(&ens, 251).unwrap();
    let d = kt / gamma;
    for (name, series) in [("D_cl", &est.diffusion_classical), ("D_q", &est.diffusion_quantum)] {
        let e = series.at(t_end);
        r.check(
            "3",
            e.within(d, 3.0),
            format!("{name}(50/gamma) = {:.4} +- {:.4} vs {d} (3 SE)", e.value, e.stderr),
        );
    }
    let ordered = est
        .diffusion_quantum
        .values
        .iter()
        .zip(&est.diffusion_classical.values)
        .all(|(q, c)| q >= c);
    r.check("3", ordered, format!("D_q >= D_cl at all {} sampled times", est.diffusion_quantum.len()));
    let ok = r.timed("3", start, 120.0);
    r.check("3", ok, "Einstein relation runtime under 2 min".into());
}

fn uncertainty(r: &mut Report) {
    let start = Instant::now();
    let gammas: Vec<f64> = (0..10).map(|k| 0.05 * k as f64).collect();
    let kts = [0.0, 0.01, 0.03, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0];
    let times: Vec<f64> = (0..20).map(|k| 2.5 * k as f64).collect();
    let (mut count, mut min) = (0, f64::INFINITY);
    for &gamma in &gammas {
        for &kt in &kts {
            let params = PhysicalParams::natural(gamma, kt);
            let width = integrate_pinney(&params, &Potential::Free, 1.0, 0.01, 50.0, WidthMode::Quantum).unwrap();
            for &t in &times {
                min = min.min(uncertainty_product(&params, &width, t).unwrap());
                count += 1;
            }
        }
    }
    r.check("4", min >= 0.5 - 1e-12 && count >= 1000, format!("min U over {count} (gamma, T, t) points = {min:.12} >= 0.5"));

    let mut peaks = Vec::new();
    for gamma in [0.1, 0.12, 0.15, 0.18] {
        let params = PhysicalParams::natural(gamma, 0.0);
        let width = integrate_pinney(&params, &Potential::Free, 1.0, 0.01, 100.0, WidthMode::Quantum).unwrap();
        let u: Vec<f64> = (0..=1000).map(|k| uncertainty_product(&params, &width, 0.1 * k as f64).unwrap()).collect();
        let maxima: Vec<usize> = (1..u.len() - 1).filter(|&i| u[i] > u[i - 1] && u[i] >= u[i + 1]).collect();
        let single = maxima.len() == 1 && u[maxima[0]] > u[0] && u[maxima[0]] > u[u.len() - 1];
        r.check(
            "4",
            single,
            format!("gamma = {gamma}, T = 0: {} interior maximum(s) on [0, 100]", maxima.len()),
        );
        if let Some(&i) = maxima.first() {
            peaks.push((gamma, 0.1 * i as f64, u[i]));
        }
    }
    let decreasing = peaks.len() == 4 && peaks.windows(2).all(|w| w[1].1 < w[0].1 && w[1].2 < w[0].2);
    let desc: Vec<String> = peaks.iter().map(|(g, t, u)| format!("gamma {g}: t = {t:.1}, U = {u:.4}")).collect();
    r.check("4", decreasing, format!("maximum location and height decrease with gamma ({})", desc.join("; ")));
    r.timed("4", start, f64::INFINITY);
}

fn oracles(r: &mut Report) {
    let start = Instant::now();
    // (a) noiseless centers against the closed form, second order
    let params = PhysicalParams::natural(0.2, 0.0);
    let potential = Potential::ParabolicRepeller { omega: 0.3 };
    let (q0, v0, t_end) = (-1.0, 0.5, 10.0);
    let (exact, _) = analytic_center(&params, &potential, q0, v0, t_end);
    let err = |dt: f64| {
        let mut stream = NoiseStream::new(1, 0, &params, dt);
        let path = integrate_langevin(&params, &potential, q0, v0, &mut stream, t_end, Scheme::default()).unwrap();
        (path.q[path.q.len() - 1] - exact).abs()
    };
    let (e1, e2, e3) = (err(0.04), err(0.02), err(0.01));
    let (r1, r2) = (e1 / e2, e2 / e3);
    r.check(
        "5a",
        (3.5..4.5).contains(&r1) && (3.5..4.5).contains(&r2),
        format!("noiseless center error ratios under dt halving: {r1:.3}, {r2:.3} (order 2 gives 4)"),
    );

    // (b) frictionless width against the closed form
    let params = PhysicalParams::natural(0.0, 0.0);
    let width = integrate_pinney(&params, &Potential::Free, 1.0, 0.01, 2.0, WidthMode::Quantum).unwrap();
    let diff = (width.at(2.0).0 - frictionless_width(&params, &Potential::Free, 1.0, 2.0)).abs();
    r.check("5b", diff <= 1e-8, format!("Pinney vs closed-form width at t = 2: |diff| = {diff:.2e} (1e-8)"));

    // (c) Monte-Carlo thermal width against the closed form
    let params = PhysicalParams::natural(0.0, 0.5);
    let t = 5.0;
    let spec = EnsembleSpec::new(params, Potential::Free, 0.0, 1.0).with_n(5000).with_seed(8).with_time(0.01, t);
    let ens = TrajectoryEnsemble::build(spec).unwrap();
    let xs: RunningStats = ens
        .map_ordered(|traj| traj.x(traj.len() - 1))
        .unwrap()
        .into_iter()
        .collect();
    let var = xs.variance();
    let se = var * (2.0 / (xs.count() as f64 - 1.0)).sqrt();
    let target = thermal_width(&params, &Potential::Free, 1.0, t, None).unwrap().powi(2);
    r.check(
        "5c",
        (var - target).abs() <= 3.0 * se,
        format!("MC thermal width^2 at t = 5: {var:.4} +- {se:.4} vs {target:.4} (3 SE)"),
    );

    // (d), (e) classified transit times against the min/max formulas
    let (gamma, omega, q0, v0) = (0.05, 0.1, -3.0, 0.3);
    let problem = BarrierProblem::new(PhysicalParams::natural(gamma, 0.0), omega, q0, 1.0).unwrap();
    let exact = problem.split_transit_times(TransportMode::Pure { v0 }, -1.0, 1.0).unwrap();
    let t_end = 40.0 / problem.lambda();
    let spec = EnsembleSpec::new(PhysicalParams::natural(gamma, 0.0), problem.potential(), q0, 1.0)
        .with_n(20_000)
        .with_seed(31)
        .with_time(0.02, t_end)
        .with_velocity(VelocityInit::Fixed(v0));
    let ens = TrajectoryEnsemble::build(spec).unwrap();
    let mc = split_by_final_side(&ens, -1.0, 1.0, 0.0).unwrap();
    let (tr, re) = (mc.tau_tr.unwrap(), mc.tau_ref.unwrap());
    let (xtr, xre) = (exact.tau_tr.unwrap(), exact.tau_ref.unwrap());
    r.check(
        "5d",
        tr.within(xtr, 3.0) && re.within(xre, 3.0),
        format!(
            "tau_tr {:.4} +- {:.4} vs {xtr:.4}, tau_ref {:.4} +- {:.4} vs {xre:.4} (3 SE)",
            tr.value, tr.stderr, re.value, re.stderr
        ),
    );
    let analytic_gap = (exact.p_tr * xtr + (1.0 - exact.p_tr) * xre - exact.dwell).abs() / exact.dwell;
    let mc_gap = (mc.recombined() - mc.dwell.mean.value).abs() / mc.dwell.mean.value;
    r.check(
        "5e",
        analytic_gap < 1e-12 && mc_gap < 1e-12,
        format!("tau_D = P tau_tr + (1 - P) tau_ref: relative gap {analytic_gap:.1e} (analytic), {mc_gap:.1e} (MC)"),
    );
    r.timed("5", start, f64::INFINITY);
}

fn statistics(r: &mut Report) {
    let start = Instant::now();
    let params = PhysicalParams::natural(0.2, 0.5);
    let mut stream = NoiseStream::new(77, 0, &params, 0.01);
    let draws: RunningStats = (0..1_000_000).map(|_| stream.sample_impulse()).collect();
    let std = (2.0f64 * 0.2 * 0.5 * 0.01).sqrt();
    r.check(
        "6",
        draws.mean().abs() <= 4.0 * std / 1e3,
        format!("impulse mean {:.2e} within {:.2e}", draws.mean(), 4.0 * std / 1e3),
    );
    r.check(
        "6",
        (draws.variance() / 2e-3 - 1.0).abs() <= 0.01,
        format!("impulse variance {:.5e} vs 2e-3 (1%)", draws.variance()),
    );
    let sampler = VelocitySampler::new(&PhysicalParams::natural(0.0, 1.0), 5);
    let v: RunningStats = (0..1_000_000u64).map(|i| sampler.sample(i)).collect();
    r.check("6", (v.variance() - 1.0).abs() <= 0.01, format!("Maxwell-Boltzmann variance {:.4} vs 1 (1%)", v.variance()));

    let gamma = 0.2;
    let spec = EnsembleSpec::new(PhysicalParams::natural(gamma, 0.5), Potential::Free, 0.0, 1.0)
        .with_n(5000)
        .with_seed(12)
        .with_time(0.01, 40.0 / gamma);
    let vacf = estimate_vacf(&TrajectoryEnsemble::build(spec).unwrap(), 400).unwrap();
    let h = vacf.half_life.unwrap();
    let target = 2f64.ln() / gamma;
    r.check(
        "6",
        h.within(target, 3.0),
        format!("VACF half-life {:.4} +- {:.4} vs ln2/gamma = {target:.4} (3 SE)", h.value, h.stderr),
    );

    let (point, _) = bar(PresetKind::RepellerArrival, &[(SweepKey::KtSystem, 1.0), (SweepKey::Omega, 0.05)]);
    let times: Vec<f64> = (0..2000).map(|k| point.t_end * k as f64 / 1999.0).collect();
    let dist = barrier(&point)
        .arrival_distribution_current(TransportMode::ThermalDissipative, point.x_d, &times)
        .unwrap();
    let norm = trapezoid(&dist.times, &dist.density);
    r.check("6", (norm - 1.0).abs() <= 1e-6, format!("arrival distribution normalization {norm:.12} (1e-6)"));
    r.timed("6", start, f64::INFINITY);
}

fn figures(r: &mut Report) {
    let start = Instant::now();

    // falling packet: four observations on the arrival profile
    let cfg = ExperimentConfig::preset(PresetKind::FallingArrival);
    let offsets: Vec<f64> = (-6..=6).map(|k| 0.5 * k as f64).collect();
    let mut profiles = Vec::new();
    for (kt, t_end) in [(0.0, 200.0), (0.1, 600.0), (1.0, 1500.0)] {
        let point = cfg.point(&[(SweepKey::Kt, kt)]);
        let mut pair = Vec::new();
        for mode in [WidthMode::Quantum, WidthMode::Classical] {
            let spec = EnsembleSpec::new(point.params, point.potential, point.q0, point.sigma0)
                .with_n(2000)
                .with_seed(4)
                .with_time(point.dt, t_end)
                .with_width_mode(mode);
            let ens = TrajectoryEnsemble::build(spec).unwrap();
            let profile = arrival_profile(&ens, point.x_d, Direction::Down, &offsets).unwrap();
            pair.push(profile.bins.iter().map(|b| b.mean.value).collect::<Vec<f64>>());
        }
        profiles.push((kt, pair));
    }
    let c = offsets.len() / 2;
    let monotone = profiles.iter().all(|(_, pair)| pair.iter().all(|p| p.windows(2).all(|w| w[1] > w[0])));
    r.check("7", monotone, "falling: arrival time increases with x0 for every T and regime".into());
    let center = profiles.iter().all(|(_, pair)| (pair[0][c] - pair[1][c]).abs() < 1e-9);
    r.check("7", center, "falling: quantum = classical for the center bin".into());
    let asym = profiles.iter().all(|(_, pair)| {
        (1..=c).all(|k| {
            let back = pair[0][c + k] - pair[1][c + k];
            let front = pair[0][c - k] - pair[1][c - k];
            back > 0.0 && back > front.abs()
        })
    });
    r.check("7", asym, "falling: dt(X) > |dt(-X)| > ... for every X > 0 and T".into());
    let warmer = (0..2).all(|m| {
        (0..offsets.len()).all(|i| profiles[0].1[m][i] < profiles[1].1[m][i] && profiles[1].1[m][i] < profiles[2].1[m][i])
    });
    r.check("7", warmer, "falling: arrival time increases with T for every x0 and regime".into());

    // repeller: the arrival peak moves earlier with the system temperature
    let peak = |omega: f64, kts: f64| {
        let (point, t_unit) = bar(PresetKind::RepellerArrival, &[(SweepKey::KtSystem, kts), (SweepKey::Omega, omega)]);
        let times: Vec<f64> = (0..2000).map(|k| point.t_end * k as f64 / 1999.0).collect();
        let dist = barrier(&point)
            .arrival_distribution_current(TransportMode::ThermalDissipative, point.x_d, &times)
            .unwrap();
        let i = (0..times.len()).max_by(|&a, &b| dist.density[a].total_cmp(&dist.density[b])).unwrap();
        times[i] / t_unit
    };
    let p05: Vec<f64> = [0.0, 1.0, 5.0].iter().map(|&t| peak(0.05, t)).collect();
    r.check(
        "7",
        p05.windows(2).all(|w| w[1] < w[0]),
        format!("repeller, omega_bar = 0.05: peak t_bar at T_s_bar = 0, 1, 5: {p05:.2?}"),
    );
    let p10: Vec<f64> = [0.0, 1.0, 5.0].iter().map(|&t| peak(0.1, t)).collect();
    r.info("7", format!("repeller, omega_bar = 0.1: peak t_bar at T_s_bar = 0, 1, 5: {p10:.2?} (see ledger)"));

    // transmission onset
    let onset = |kt: f64| {
        let (point, t_unit) = bar(PresetKind::Transmission, &[(SweepKey::Gamma, 0.1), (SweepKey::Kt, kt)]);
        let problem = barrier(&point);
        (0..=2000)
            .map(|k| 0.1 * k as f64)
            .find(|&tb| problem.transmission_probability(TransportMode::StochasticThermal, tb * t_unit).unwrap() > 1e-3)
    };
    let onsets: Vec<Option<f64>> = [10.0, 30.0, 50.0, 80.0].iter().map(|&kt| onset(kt)).collect();
    let earlier = onsets.iter().all(Option::is_some) && onsets.windows(2).all(|w| w[1] < w[0]);
    r.check(
        "7",
        earlier,
        format!("transmission: first t_bar with P > 1e-3 at T_bar = 10, 30, 50, 80: {onsets:.1?}"),
    );
    let ok = r.timed("7", start, 300.0);
    r.check("7", ok, "figure reproductions runtime under 5 min".into());
}

fn main() {
    // `cargo test -- --list` and filters from the libtest harness
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    slb::init_workers_from_env().unwrap();
    let mut r = Report { lines: Vec::new() };
    dwell(&mut r);
    transmission(&mut r);
    einstein(&mut r);
    uncertainty(&mut r);
    oracles(&mut r);
    statistics(&mut r);
    figures(&mut r);

    let unexpected: Vec<&str> = r
        .lines
        .iter()
        .filter(|(id, pass)| !pass && !KNOWN_UNATTAINABLE.contains(&id.as_str()))
        .map(|(id, _)| id.as_str())
        .collect();
    let stale: Vec<&str> = KNOWN_UNATTAINABLE
        .iter()
        .copied()
        .filter(|id| r.lines.iter().any(|(l, pass)| l == id && *pass))
        .collect();
    let passed = r.lines.iter().filter(|l| l.1).count();
    println!("acceptance: {passed}/{} checks passed", r.lines.len());
    if !unexpected.is_empty() || !stale.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}; known-unattainable checks now passing: {stale:?}");
        std::process::exit(1);
    }
}
