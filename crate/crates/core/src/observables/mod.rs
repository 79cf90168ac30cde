//! Monte-Carlo estimators over trajectory ensembles. Each has an analytic
//! counterpart in [`crate::analytics`] it is validated against.

pub mod arrival;
pub mod dwell;
pub mod msd;
pub mod series;

pub use arrival::{
    arrival_profile, first_arrival, first_crossing, mean_arrival_time, ArrivalProfile, ArrivalRecord,
    ArrivalSummary, Direction,
};
pub use dwell::{
    dwell_time_trajectory, member_dwell, residence_time, segment_residence, split_by_final_side,
    transmission_fraction, DwellEstimate, MemberDwell, SplitEstimate,
};
pub use msd::{estimate_msd_diffusion, estimate_vacf, MsdEstimate, VacfEstimate};
pub use series::{accumulate, accumulate_scalar, output_steps, Estimate, ObservableSeries, RunningStats};
