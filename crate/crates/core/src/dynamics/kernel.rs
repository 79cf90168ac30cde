//! Closed-form propagator of the damped linear equation
//! `qddot + gamma qdot - kappa q = -g + F(t)/m`.
//!
//! `c(t)` and `s(t)` are the homogeneous solutions with `c(0) = 1, c'(0) = 0`
//! and `s(0) = 0, s'(0) = 1`, so the deterministic center is
//! `q0 c + v0 s - g int_0^t s` and the noise enters as `(1/m) int F(tau) s(t - tau)`.
//! All free, falling, repeller and oscillator formulas are specializations.

use crate::physics::{omega_eff, DampedFrequency, PhysicalParams, Potential};

/// Switch to power series when `gamma t` is below this.
const SERIES_SWITCH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedKernel {
    pub gamma: f64,
    pub kappa: f64,
    pub g: f64,
    freq: DampedFrequency,
}

/// Values of the propagator at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub c: f64,
    pub s: f64,
    pub sdot: f64,
}

impl KernelValues {
    pub fn cdot(&self, kappa: f64) -> f64 {
        kappa * self.s
    }
}

impl DampedKernel {
    pub fn new(gamma: f64, potential: &Potential) -> Self {
        Self {
            gamma,
            kappa: potential.curvature_rate(),
            g: potential.gravity(),
            freq: omega_eff(gamma, potential),
        }
    }

    pub fn from_params(params: &PhysicalParams, potential: &Potential) -> Self {
        Self::new(params.gamma, potential)
    }

    pub fn frequency(&self) -> DampedFrequency {
        self.freq
    }

    /// Asymptotic exponential growth rate `Omega - gamma/2` of the
    /// homogeneous solutions (zero or negative unless the potential repels).
    pub fn growth_rate(&self) -> f64 {
        match self.freq {
            DampedFrequency::Hyperbolic(w) => w - 0.5 * self.gamma,
            _ => -0.5 * self.gamma,
        }
    }

    pub fn eval(&self, t: f64) -> KernelValues {
        let half = 0.5 * self.gamma;
        // (e^{-gamma t/2} C, e^{-gamma t/2} S) with C = cosh/cos/1, S = sinh/w, sin/w, t
        let (ec, es) = match self.freq {
            DampedFrequency::Hyperbolic(w) => {
                let wt = w * t;
                if wt > 1.0 {
                    let grow = ((w - half) * t).exp();
                    let decay = (-(w + half) * t).exp();
                    (0.5 * (grow + decay), 0.5 * (grow - decay) / w)
                } else {
                    let damp = (-half * t).exp();
                    (damp * wt.cosh(), damp * wt.sinh() / w)
                }
            }
            DampedFrequency::Critical => {
                let damp = (-half * t).exp();
                (damp, damp * t)
            }
            DampedFrequency::Oscillatory(w) => {
                let damp = (-half * t).exp();
                let wt = w * t;
                (damp * wt.cos(), damp * wt.sin() / w)
            }
        };
        let mut values = KernelValues {
            c: ec + half * es,
            s: es,
            sdot: ec - half * es,
        };
        if self.kappa == 0.0 {
            // exact force-free forms avoid the cancellation in ec - half*es
            let x = self.gamma * t;
            values.c = 1.0;
            values.s = if self.gamma == 0.0 { t } else { -(-x).exp_m1() / self.gamma };
            values.sdot = (-x).exp();
        }
        values
    }

    /// `int_0^t s(tau) dtau`, the response to a unit constant force.
    pub fn force_response(&self, t: f64) -> f64 {
        if self.kappa == 0.0 {
            let x = self.gamma * t;
            if x < SERIES_SWITCH {
                t * t * series(x, &FORCE_SERIES)
            } else {
                (x - 1.0 + (-x).exp()) / (self.gamma * self.gamma)
            }
        } else {
            (self.eval(t).c - 1.0) / self.kappa
        }
    }

    /// Deterministic center `(q, qdot)` for the given initial condition.
    pub fn center(&self, q0: f64, v0: f64, t: f64) -> (f64, f64) {
        let k = self.eval(t);
        let q = q0 * k.c + v0 * k.s - self.g * self.force_response(t);
        let v = q0 * k.cdot(self.kappa) + v0 * k.sdot - self.g * k.s;
        (q, v)
    }

    /// `2 gamma int_0^t s^2`: position variance of the noise part, in units of `kT/m`.
    pub fn noise_position_variance(&self, t: f64) -> f64 {
        if self.gamma == 0.0 {
            return 0.0;
        }
        if self.kappa == 0.0 {
            let x = self.gamma * t;
            if x < SERIES_SWITCH {
                self.gamma * t * t * t * series(x, &NOISE_SERIES)
            } else {
                (2.0 * x - 3.0 + 4.0 * (-x).exp() - (-2.0 * x).exp()) / (self.gamma * self.gamma)
            }
        } else {
            let k = self.eval(t);
            (k.c * k.c - 1.0) / self.kappa - k.s * k.s
        }
    }

    /// `2 gamma int_0^t sdot^2`: velocity variance of the noise part, in units of `kT/m`.
    pub fn noise_velocity_variance(&self, t: f64) -> f64 {
        if self.gamma == 0.0 {
            return 0.0;
        }
        if self.kappa == 0.0 {
            -(-2.0 * self.gamma * t).exp_m1()
        } else {
            let k = self.eval(t);
            1.0 + self.kappa * k.s * k.s - k.sdot * k.sdot
        }
    }
}

// (x - 1 + e^-x) / x^2
const FORCE_SERIES: [f64; 8] = [
    1.0 / 2.0,
    -1.0 / 6.0,
    1.0 / 24.0,
    -1.0 / 120.0,
    1.0 / 720.0,
    -1.0 / 5040.0,
    1.0 / 40320.0,
    -1.0 / 362880.0,
];

// (2x - 3 + 4e^-x - e^-2x) / x^3
const NOISE_SERIES: [f64; 7] = [
    2.0 / 3.0,
    -1.0 / 2.0,
    7.0 / 30.0,
    -1.0 / 12.0,
    31.0 / 1260.0,
    -1.0 / 160.0,
    127.0 / 90720.0,
];

fn series(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Closed-form noiseless center `(q, qdot)` at time `t`.
pub fn analytic_center(
    params: &PhysicalParams,
    potential: &Potential,
    q0: f64,
    v0: f64,
    t: f64,
) -> (f64, f64) {
    DampedKernel::from_params(params, potential).center(q0, v0, t)
}
