//! True-martingale test for stochastic exponentials of one-dimensional
//! diffusions.

pub mod feller;
pub mod gbm;
pub mod quad;
pub mod special;

pub use feller::{
    analyze_endpoint, classify_martingale, endpoint_exit, endpoint_good, scale_density,
    scale_function, tilted_density, DiffusionSpec, EndpointReport, EndpointValue, FellerReport,
    Side, Verdict,
};
pub use gbm::{
    custom_table, gbm_closed_forms, gbm_gamma0, gbm_inverse, gbm_linear, gbm_spec,
    CoefficientTable, GbmForms,
};
pub use special::{exp_integral_ei, incomplete_gamma_ext};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{param, Result};
use crate::flow::MeanEstimate;
use crate::parallel::map_paths;
use crate::rng::{stream, Purpose};

/// Monte Carlo estimate of `E[Z_T]`, `Z = E(int f(Y) dB)`, from `Y_0 = x0`.
///
/// Euler steps for `Y`; a step that would leave `J` is replaced by the
/// midpoint between the current value and the endpoint.
pub fn mc_exponential_mean(
    spec: &DiffusionSpec,
    x0: f64,
    horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<MeanEstimate> {
    if !spec.contains(x0) {
        return Err(param("x0", "must lie inside J"));
    }
    if !(dt > 0.0) || !(horizon > 0.0) || n_paths < 2 {
        return Err(param(
            "dt",
            "need dt > 0, horizon > 0 and at least two paths",
        ));
    }
    let steps = (horizon / dt).round().max(1.0) as usize;
    let sd = dt.sqrt();
    let z: Vec<f64> = map_paths(n_paths as u64, threads, |i| {
        let mut rng = stream(seed, Purpose::Lab, i);
        let mut y = x0;
        let mut log_z = 0.0;
        for _ in 0..steps {
            let e: f64 = StandardNormal.sample(&mut rng);
            let db = sd * e;
            let fy = (spec.f)(y);
            log_z += fy * db - 0.5 * fy * fy * dt;
            let next = y + (spec.mu)(y) * dt + (spec.sigma)(y) * db;
            y = if next <= spec.l {
                0.5 * (y + spec.l)
            } else if next >= spec.r {
                0.5 * (y + spec.r)
            } else {
                next
            };
        }
        log_z.exp()
    });
    Ok(MeanEstimate::from_samples(&z))
}
