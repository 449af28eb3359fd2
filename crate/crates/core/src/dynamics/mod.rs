//! Coupled integration of the fundamental, liquidity, contagion and bubble.

mod burst;
mod explicit;
mod path;
mod steps;

pub use burst::{burst_monitor, BurstMonitor, Regime};
pub use explicit::explicit_bubble;
pub(crate) use path::grid_index;
pub use path::{
    first_event_by_thinning, sample_tau, BirthTime, BubbleModel, PathNoise, PerDegreeRecord,
    Trajectory,
};
pub use steps::{
    advance_contagion, aggregate_drift, aggregate_vol, init_bubble, step_bubble, step_contagion,
    step_fundamental, step_gbm, step_liquidity, step_resiliency, step_wealth_cap, BubbleStep,
    Resiliency, POSITIVE_FLOOR,
};
