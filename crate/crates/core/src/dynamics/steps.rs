//! Single Euler–Maruyama steps for each state variable.

use crate::error::{param, Result};
use crate::network::{weighted_volume, DegreeDistribution, PerDegreeVolumes};
use crate::params::{LambdaMode, ModelParams};

/// Smallest value a strictly positive state may be clamped to.
pub const POSITIVE_FLOOR: f64 = 1e-300;

/// `W' = W (1 + a dt + b dB1)`, kept strictly positive.
pub fn step_fundamental(wf: f64, a: f64, b: f64, db1: f64, dt: f64) -> f64 {
    step_gbm(wf, a, b, db1, dt)
}

/// Euler step of a geometric Brownian motion with a positivity clamp.
pub fn step_gbm(x: f64, mu: f64, sigma: f64, db: f64, dt: f64) -> f64 {
    (x * (1.0 + mu * dt + sigma * db)).max(POSITIVE_FLOOR)
}

/// Illiquidity `M`.
pub fn step_liquidity(m: f64, mu_m: f64, sigma_m: f64, db3: f64, dt: f64) -> f64 {
    step_gbm(m, mu_m, sigma_m, db3, dt)
}

/// Per-investor wealth cap `theta`.
pub fn step_wealth_cap(theta: f64, mu_theta: f64, sigma_theta: f64, db3: f64, dt: f64) -> f64 {
    step_gbm(theta, mu_theta, sigma_theta, db3, dt)
}

/// Resiliency dynamics kept inside `[low, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resiliency {
    Constant,
    Diffusion {
        kappa: f64,
        target: f64,
        vol: f64,
        low: f64,
    },
}

impl Resiliency {
    pub fn from_params(p: &ModelParams) -> Result<Self> {
        match p.lambda_mode {
            LambdaMode::Constant => Ok(Resiliency::Constant),
            LambdaMode::Diffusion => {
                if !(p.lambda_target > p.lambda_low && p.lambda_target < 1.0) {
                    return Err(param("lambda_target", "must lie in (lambda_low, 1)"));
                }
                if !(p.lambda_kappa > 0.0) || !(p.lambda_vol >= 0.0) {
                    return Err(param("lambda_kappa", "kappa must be > 0 and vol >= 0"));
                }
                Ok(Resiliency::Diffusion {
                    kappa: p.lambda_kappa,
                    target: p.lambda_target,
                    vol: p.lambda_vol,
                    low: p.lambda_low,
                })
            }
        }
    }

    pub fn step(&self, lambda: f64, db4: f64, dt: f64) -> f64 {
        match *self {
            Resiliency::Constant => lambda,
            Resiliency::Diffusion {
                kappa,
                target,
                vol,
                low,
            } => {
                let next = lambda
                    + kappa * (target - lambda) * dt
                    + vol * (lambda - low) * (1.0 - lambda) * db4;
                next.clamp(low, 1.0)
            }
        }
    }
}

/// One step of the resiliency process under `params`.
pub fn step_resiliency(lambda: f64, params: &ModelParams, db4: f64, dt: f64) -> Result<f64> {
    Ok(Resiliency::from_params(params)?.step(lambda, db4, dt))
}

/// Mean-field SIS step for every degree class, returning the new volumes.
pub fn step_contagion(
    vols: &PerDegreeVolumes,
    dist: &DegreeDistribution,
    theta: f64,
    lambda: f64,
    delta: f64,
    dt: f64,
) -> PerDegreeVolumes {
    let n = weighted_volume(dist, vols);
    let mut values = vols.values.clone();
    let kp = dist.edge_weights();
    advance_contagion(
        &mut values,
        &kp,
        n / dist.z,
        theta,
        theta,
        lambda,
        delta,
        dt,
    );
    PerDegreeVolumes {
        values,
        theta_cap: theta,
    }
}

/// In-place contagion step used by the path integrator.
///
/// `pressure` is `n / z`. Updates `x[k]` by
/// `dt (-delta x + lambda k pressure (theta - x))`, clamps to `[0, cap]`,
/// and returns the new `n = sum_k k p_k x[k]`.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn advance_contagion(
    x: &mut [f64],
    kp: &[f64],
    pressure: f64,
    theta: f64,
    cap: f64,
    lambda: f64,
    delta: f64,
    dt: f64,
) -> f64 {
    let push = lambda * pressure * dt;
    let keep = 1.0 - delta * dt;
    let mut n = 0.0;
    for (k, (xk, w)) in x.iter_mut().zip(kp).enumerate() {
        let kf = k as f64;
        let next = *xk * keep + push * kf * (theta - *xk);
        let next = next.clamp(0.0, cap);
        *xk = next;
        n += w * next;
    }
    n
}

/// Drift of the aggregate volume, `-delta X + lambda N n (theta - n/z)`.
pub fn aggregate_drift(
    x: f64,
    n: f64,
    theta: f64,
    z: f64,
    nodes: f64,
    lambda: f64,
    delta: f64,
) -> f64 {
    let pressure = if z > 0.0 { n / z } else { 0.0 };
    -delta * x + lambda * nodes * n * (theta - pressure)
}

/// Volatility of the aggregate volume,
/// `sigma_bar u (X/u)^alpha ((N theta - X)/u)^alpha` with volume unit `u`.
///
/// With `u = 1` this is `sigma_bar X^alpha (N theta - X)^alpha`.
pub fn aggregate_vol(x: f64, theta: f64, nodes: f64, sigma_bar: f64, alpha: f64, unit: f64) -> f64 {
    if sigma_bar == 0.0 {
        return 0.0;
    }
    let held = (x / unit).max(0.0);
    let room = ((nodes * theta - x) / unit).max(0.0);
    sigma_bar * unit * held.powf(alpha) * room.powf(alpha)
}

/// Bubble size at birth, `2 x L M W^F`.
pub fn init_bubble(x: f64, lambda: f64, m: f64, wf: f64) -> f64 {
    2.0 * x * lambda * m * wf
}

/// State needed to advance the bubble by one step.
#[derive(Debug, Clone, Copy)]
pub struct BubbleStep {
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub m: f64,
    pub wf: f64,
    pub x_birth: f64,
    pub k_decay: f64,
}

/// `b' = b + L M (-k b + 2 mu) dt + 2 L M sigma dB2 + 2 L M x W^F dN`.
pub fn step_bubble(beta: f64, s: &BubbleStep, db2: f64, dn: f64, dt: f64) -> f64 {
    let lm = s.lambda * s.m;
    beta + lm * (-s.k_decay * beta + 2.0 * s.mu) * dt
        + 2.0 * lm * s.sigma * db2
        + 2.0 * lm * s.x_birth * s.wf * dn
}
