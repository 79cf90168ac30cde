use crate::error::{Error, Result};
use crate::noise::NoiseStream;
use crate::physics::{PhysicalParams, Potential};

use super::TimeGrid;

/// Stochastic integrator for the center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Vanden-Eijnden & Ciccotti second-order Langevin scheme.
    #[default]
    VandenEijndenCiccotti,
    /// First-order cross-check.
    EulerMaruyama,
}

/// Sampled center position and velocity on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterPath {
    pub grid: TimeGrid,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl CenterPath {
    pub fn q0(&self) -> f64 {
        self.q[0]
    }
}

/// Solves `qddot + gamma qdot + V'(q)/m = F_r/m` with the noise of `stream`.
///
/// The grid spacing is the stream's `dt`. Fails on the first non-finite
/// state, reporting the step index.
pub fn integrate_langevin(
    params: &PhysicalParams,
    potential: &Potential,
    q0: f64,
    v0: f64,
    stream: &mut NoiseStream,
    t_end: f64,
    scheme: Scheme,
) -> Result<CenterPath> {
    let grid = TimeGrid::from_horizon(stream.dt(), t_end)?;
    let h = grid.dt;
    let gamma = params.gamma;
    // velocity kick std per step, sigma_v sqrt(h)
    let kick = stream.impulse_std() / params.mass;
    let silent = stream.is_silent();

    let mut q = Vec::with_capacity(grid.len());
    let mut qdot = Vec::with_capacity(grid.len());
    q.push(q0);
    qdot.push(v0);
    let (mut x, mut v) = (q0, v0);

    const INV_SQRT3: f64 = 0.577_350_269_189_625_8;
    for step in 1..=grid.steps {
        let (xi, eta) = if silent { (0.0, 0.0) } else { stream.standard_pair() };
        match scheme {
            Scheme::VandenEijndenCiccotti => {
                let corr = 0.25 * h * gamma * kick * (0.5 * xi + INV_SQRT3 * eta);
                let a = potential.acceleration(x);
                let v_half = v + 0.5 * h * (a - gamma * v) + 0.5 * kick * xi
                    - 0.125 * h * h * gamma * (a - gamma * v)
                    - corr;
                x += h * v_half + 0.5 * INV_SQRT3 * h * kick * eta;
                let a = potential.acceleration(x);
                v = v_half + 0.5 * h * (a - gamma * v_half) + 0.5 * kick * xi
                    - 0.125 * h * h * gamma * (a - gamma * v_half)
                    - corr;
            }
            Scheme::EulerMaruyama => {
                let a = potential.acceleration(x);
                x += h * v;
                v += h * (a - gamma * v) + kick * xi;
            }
        }
        if !(x.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite {
                step,
                t: grid.t(step),
                what: "center position/velocity overflowed",
            });
        }
        q.push(x);
        qdot.push(v);
    }
    Ok(CenterPath { grid, q, qdot })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::analytic_center;

    fn silent(dt: f64) -> NoiseStream {
        NoiseStream::new(0, 0, &PhysicalParams::natural(0.0, 0.0), dt)
    }

    #[test]
    fn free_damped_without_noise() {
        let p = PhysicalParams::natural(0.2, 0.0);
        let path = integrate_langevin(&p, &Potential::Free, 0.0, 1.0, &mut silent(1e-3), 5.0, Scheme::default()).unwrap();
        let exact = (1.0 - (-1.0f64).exp()) / 0.2;
        assert!((path.q.last().unwrap() - exact).abs() < 1e-6);
        assert!((exact - 3.1606).abs() < 1e-4);
    }

    #[test]
    fn falling_particle_reaches_ground_near_45() {
        let p = PhysicalParams::natural(0.2, 0.0);
        let path = integrate_langevin(&p, &Potential::Linear { g: 0.05 }, 10.0, 0.0, &mut silent(1e-3), 60.0, Scheme::default())
            .unwrap();
        let i = path.q.iter().position(|&x| x <= 0.0).unwrap();
        let t = path.grid.t(i);
        // root of 0.2 t + exp(-0.2 t) = 9
        let mut root = 45.0f64;
        for _ in 0..50 {
            root -= (0.2 * root + (-0.2 * root).exp() - 9.0) / (0.2 - 0.2 * (-0.2 * root).exp());
        }
        assert!((root - 45.0).abs() < 1e-3);
        assert!((t - root).abs() <= path.grid.dt + 1e-9, "t {t}, root {root}");
    }

    #[test]
    fn repeller_initial_condition() {
        let p = PhysicalParams::natural(0.1, 0.0);
        let path = integrate_langevin(&p, &Potential::ParabolicRepeller { omega: 0.3 }, -4.0, 0.0, &mut silent(0.01), 1.0, Scheme::default())
            .unwrap();
        assert_eq!(path.q[0], -4.0);
        assert_eq!(path.qdot[0], 0.0);
    }

    #[test]
    fn overflow_reports_step() {
        let p = PhysicalParams::natural(0.0, 0.0);
        let err = integrate_langevin(&p, &Potential::ParabolicRepeller { omega: 50.0 }, 1.0, 0.0, &mut silent(0.01), 100.0, Scheme::default())
            .unwrap_err();
        match err {
            Error::NonFinite { step, .. } => assert!(step > 1),
            other => panic!("unexpected {other}"),
        }
    }

    fn max_error(dt: f64, scheme: Scheme, pot: Potential, gamma: f64) -> f64 {
        let p = PhysicalParams::natural(gamma, 0.0);
        let path = integrate_langevin(&p, &pot, 0.7, -0.4, &mut silent(dt), 8.0, scheme).unwrap();
        path.grid
            .times()
            .zip(&path.q)
            .map(|(t, q)| (q - analytic_center(&p, &pot, 0.7, -0.4, t).0).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn second_order_convergence() {
        for pot in [
            Potential::Free,
            Potential::Linear { g: 0.05 },
            Potential::ParabolicRepeller { omega: 0.3 },
            Potential::Harmonic { omega: 0.8 },
        ] {
            for gamma in [0.0, 0.1, 0.5] {
                let e1 = max_error(0.02, Scheme::VandenEijndenCiccotti, pot, gamma);
                let e2 = max_error(0.01, Scheme::VandenEijndenCiccotti, pot, gamma);
                if e1 < 1e-12 {
                    continue; // exact for this case (e.g. force-free, frictionless)
                }
                let order = (e1 / e2).log2();
                assert!(order > 1.8 && order < 2.3, "{pot:?} gamma {gamma}: order {order}");
            }
        }
    }

    #[test]
    fn euler_maruyama_is_first_order() {
        let pot = Potential::ParabolicRepeller { omega: 0.3 };
        let e1 = max_error(0.02, Scheme::EulerMaruyama, pot, 0.5);
        let e2 = max_error(0.01, Scheme::EulerMaruyama, pot, 0.5);
        let order = (e1 / e2).log2();
        assert!(order > 0.8 && order < 1.3, "order {order}");
    }
}
