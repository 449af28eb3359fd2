use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::density::density_path;
use super::kernels::{drift_check, flow_kernels, FlowSettings, HorizonLaw};
use crate::dynamics::BubbleModel;
use crate::error::{Error, Result};
use crate::parallel::map_paths;
use crate::rng::{stream, Purpose};

/// Below this effective sample size the importance weights are flagged.
pub const MIN_EFFECTIVE_SAMPLE: f64 = 100.0;

/// Mean of `Z_{t,s}` at one probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMoment {
    pub s: f64,
    #[serde(rename = "mean_Z")]
    pub mean_z: f64,
    #[serde(rename = "se_Z")]
    pub se_z: f64,
}

/// Outcome of a flow check at one evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowReport {
    pub t: f64,
    pub n_paths: usize,
    /// Mean and standard error of `Z_{t, T - epsilon}`.
    #[serde(rename = "mean_Z")]
    pub mean_z: f64,
    #[serde(rename = "se_Z")]
    pub se_z: f64,
    /// `E[Z W^F_{T-eps}]` against `E[Z W^F_t]`.
    pub pricing_lhs: f64,
    pub pricing_rhs: f64,
    pub z_score: f64,
    pub bound_violations: usize,
    pub degeneracy_count: usize,
    pub epsilon: f64,
    pub eta: f64,
    /// Paths dropped because their density overflowed.
    pub excluded: usize,
    pub effective_sample_size: f64,
    pub low_effective_sample: bool,
    pub max_drift_residual: f64,
    pub grid: Vec<DensityMoment>,
}

/// Options for [`flow_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCheckOptions {
    pub settings: FlowSettings,
    pub n_paths: usize,
    /// Probe times `t + (T - eps - t) j / m` for `j = 1..=m`.
    pub grid_points: usize,
    pub threads: Option<usize>,
}

impl FlowCheckOptions {
    pub fn new(t_eval: f64, dt: f64, n_paths: usize) -> Self {
        Self {
            settings: FlowSettings::new(t_eval, dt),
            n_paths,
            grid_points: 10,
            threads: None,
        }
    }
}

struct PathFlow {
    finite: bool,
    z_grid: Vec<f64>,
    wf_t: f64,
    wf_end: f64,
    bound_ok: bool,
    degenerate: usize,
    residual: f64,
    eta: f64,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    if n == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Simulates `n_paths` paths, builds the flow at `t` on each, and reports
/// the density moments, the pricing identity and the pathwise invariants.
pub fn flow_check(model: &BubbleModel, opts: &FlowCheckOptions) -> Result<FlowReport> {
    let p = &model.params;
    let horizon = HorizonLaw::Deterministic(p.horizon);
    let fs = opts.settings;
    let m = opts.grid_points.max(1);
    let span = p.horizon - fs.epsilon - fs.t_eval;
    let probes: Vec<f64> = (1..=m)
        .map(|j| fs.t_eval + span * j as f64 / m as f64)
        .collect();

    let per_path = map_paths(opts.n_paths as u64, opts.threads, |i| -> Result<PathFlow> {
        let tr = model.simulate_path(i)?;
        let k = flow_kernels(&tr, p, &horizon, &fs)?;
        let d = density_path(&k, &tr, p);
        let z_grid = probes
            .iter()
            .map(|&s| {
                let g = tr.index_of(s).unwrap_or(k.last).min(k.last);
                d.z[g - k.first]
            })
            .collect();
        Ok(PathFlow {
            finite: d.is_finite(),
            z_grid,
            wf_t: tr.wf[k.first],
            wf_end: tr.wf[k.last],
            bound_ok: d.bound_holds(p.horizon, p.pi_bound),
            degenerate: k.degenerate,
            residual: drift_check(&k, &tr, p),
            eta: k.eta,
        })
    });
    let per_path: Vec<PathFlow> = per_path.into_iter().collect::<Result<_>>()?;
    let total = per_path.len();
    let kept: Vec<&PathFlow> = per_path.iter().filter(|r| r.finite).collect();
    if kept.is_empty() {
        return Err(Error::Ensemble {
            invalid: total,
            total,
        });
    }

    let grid = probes
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let (mean_z, se_z) = mean_se(kept.iter().map(|r| r.z_grid[j]));
            DensityMoment { s, mean_z, se_z }
        })
        .collect::<Vec<_>>();
    let z_end = |r: &&PathFlow| *r.z_grid.last().unwrap();
    let (mean_z, se_z) = mean_se(kept.iter().map(z_end));
    let lhs = kept.iter().map(|r| z_end(r) * r.wf_end).sum::<f64>() / kept.len() as f64;
    let rhs = kept.iter().map(|r| z_end(r) * r.wf_t).sum::<f64>() / kept.len() as f64;
    let (diff, diff_se) = mean_se(kept.iter().map(|r| z_end(r) * (r.wf_end - r.wf_t)));
    let z_score = if diff_se > 0.0 { diff / diff_se } else { 0.0 };
    let sum_w: f64 = kept.iter().map(z_end).sum();
    let sum_w2: f64 = kept.iter().map(|r| z_end(r).powi(2)).sum();
    let ess = sum_w * sum_w / sum_w2;

    Ok(FlowReport {
        t: fs.t_eval,
        n_paths: total,
        mean_z,
        se_z,
        pricing_lhs: lhs,
        pricing_rhs: rhs,
        z_score,
        bound_violations: per_path.iter().filter(|r| !r.bound_ok).count(),
        degeneracy_count: per_path.iter().map(|r| r.degenerate).sum(),
        epsilon: fs.epsilon,
        eta: per_path[0].eta,
        excluded: total - kept.len(),
        effective_sample_size: ess,
        low_effective_sample: ess < MIN_EFFECTIVE_SAMPLE,
        max_drift_residual: per_path.iter().map(|r| r.residual).fold(0.0, f64::max),
        grid,
    })
}

/// Pricing check at `t` with default settings (`epsilon = dt`, ten probes).
pub fn pricing_check(model: &BubbleModel, t: f64, n_paths: usize) -> Result<FlowReport> {
    flow_check(model, &FlowCheckOptions::new(t, model.params.dt, n_paths))
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let (mean, se) = mean_se(xs.iter().copied());
        Self {
            mean,
            se,
            n: xs.len(),
        }
    }

    /// `|mean - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.se
    }
}

/// Fundamental dynamics under `Q^t` after the birth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowFundamental {
    pub t: f64,
    pub wf_t: f64,
    pub eta: f64,
    pub b: f64,
    pub horizon: f64,
    pub dt: f64,
}

/// Integrates `dW = 2 (eta - s) ds + b W dB` from `(t, W_t)` to the horizon
/// on `n_paths` paths and returns the mean terminal value.
///
/// The time-only drift is integrated exactly over each cell, so the
/// discrete drift sums to zero just as `int_t^T (eta - s) ds` does.
pub fn simulate_fundamental_under_flow(
    f: &FlowFundamental,
    n_paths: usize,
    seed: u64,
    threads: Option<usize>,
) -> MeanEstimate {
    let steps = ((f.horizon - f.t) / f.dt).round().max(0.0) as usize;
    let dt = if steps > 0 {
        (f.horizon - f.t) / steps as f64
    } else {
        0.0
    };
    let sd = dt.sqrt();
    let finals = map_paths(n_paths as u64, threads, |i| {
        let mut rng = stream(seed, Purpose::Flow, i);
        let mut w = f.wf_t;
        for j in 0..steps {
            let mid = f.t + (j as f64 + 0.5) * dt;
            let z: f64 = StandardNormal.sample(&mut rng);
            w += 2.0 * (f.eta - mid) * dt + f.b * w * sd * z;
        }
        w
    });
    let (mean, se) = mean_se(finals.iter().copied());
    MeanEstimate {
        mean,
        se,
        n: n_paths,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_fundamental_returns_start() {
        let f = FlowFundamental {
            t: 1.0,
            wf_t: 1.3,
            eta: 2.0,
            b: 0.0,
            horizon: 3.0,
            dt: 1e-3,
        };
        let est = simulate_fundamental_under_flow(&f, 3, 1, Some(1));
        assert!((est.mean - 1.3).abs() < 1e-12, "{}", est.mean);
        assert_eq!(est.se, 0.0);
    }

    #[test]
    fn shifted_centre_moves_mean_by_its_integral() {
        let base = FlowFundamental {
            t: 1.0,
            wf_t: 1.3,
            eta: 2.0,
            b: 0.0,
            horizon: 3.0,
            dt: 1e-3,
        };
        let shifted = FlowFundamental { eta: 2.25, ..base };
        let a = simulate_fundamental_under_flow(&base, 1, 1, Some(1)).mean;
        let b = simulate_fundamental_under_flow(&shifted, 1, 1, Some(1)).mean;
        // 2 * 0.25 * (T - t)
        assert!((b - a - 1.0).abs() < 1e-9, "{}", b - a);
    }
}
