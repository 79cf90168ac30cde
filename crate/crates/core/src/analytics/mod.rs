//! Closed-form thermal expressions: widths, moments, distributions,
//! erfc transmission probabilities and dwell/arrival integrals. These are the
//! oracles the Monte-Carlo estimators are checked against.

mod moments;
pub mod special;
mod transport;

pub use moments::{
    center_variance, diffusion_constant, frictionless_width, momentum_distribution, momentum_stats, msd_and_diffusion,
    thermal_moments, thermal_width, uncertainty_product, vacf, w1_density, w1_distribution, wigner_free, Diffusion,
    MomentumStats, ThermalMoments, W1Distribution,
};
pub use special::{erf, erfc, half_erfc, GaussHermite};
pub use transport::{
    simpson_with_tail, trapezoid, ArrivalDistribution, BarrierProblem, CenterConvention, Localization, Quadrature,
    SplitTimes, TransportMode,
};
