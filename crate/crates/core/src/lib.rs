//! Simulation of asset-price bubbles driven by network trading contagion,
//! with the pricing-measure flow and a martingale classifier for
//! one-dimensional diffusions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod lab;
pub mod montecarlo;
pub mod network;
pub mod output;
pub mod parallel;
pub mod params;
pub mod rng;

pub use config::RunConfig;
pub use dynamics::{BubbleModel, Regime, Trajectory};
pub use error::{Error, Result};
pub use network::{DegreeDistribution, NetworkSpec};
pub use params::ModelParams;
