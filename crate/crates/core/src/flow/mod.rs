//! Flow of pricing measures `Q^t` under which the fundamental prices the
//! terminal fundamental, built from three Girsanov kernels.

mod check;
mod density;
mod kernels;

pub use check::{
    flow_check, pricing_check, simulate_fundamental_under_flow, DensityMoment, FlowCheckOptions,
    FlowFundamental, FlowReport, MeanEstimate, MIN_EFFECTIVE_SAMPLE,
};
pub use density::{density_path, DensityPath};
pub use kernels::{
    alpha1, alpha2, alpha3, drift_check, eta, flow_kernels, FlowKernels, FlowSettings, HorizonLaw,
    KernelState, VOL_FLOOR,
};
