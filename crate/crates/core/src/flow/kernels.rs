use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{param, Error, Result};
use crate::params::ModelParams;

/// Default floor applied to `sigma` in the `alpha2` denominator.
pub const VOL_FLOOR: f64 = 1e-12;

/// What is known at time `t` about the liquidation date `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonLaw {
    Deterministic(f64),
    /// Conditional moments `E[T | F_t]` and `E[T^2 | F_t]` of a bounded
    /// random horizon.
    Moments {
        mean: f64,
        second: f64,
    },
}

impl HorizonLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            HorizonLaw::Deterministic(t) => t,
            HorizonLaw::Moments { mean, .. } => mean,
        }
    }

    pub fn second(&self) -> f64 {
        match *self {
            HorizonLaw::Deterministic(t) => t * t,
            HorizonLaw::Moments { second, .. } => second,
        }
    }
}

/// Centre `eta` of the pricing correction `s - eta`.
///
/// `start` is `max(tau, t)` and `carry` the pre-birth integral
/// `int_t^tau W^F pi x L M (alpha3 + 1) ds` (zero once `t >= tau`). The value
/// solves `E[int_start^T (eta - s) ds] = carry`:
/// `eta = (E[T^2] - start^2) / (2 E[T - start]) + carry / E[T - start]`.
pub fn eta(start: f64, horizon: &HorizonLaw, carry: f64) -> Result<f64> {
    let span = horizon.mean() - start;
    if !(span > 0.0) {
        return Err(param("t_eval", "must precede the expected horizon"));
    }
    if horizon.second() < horizon.mean().powi(2) * (1.0 - 1e-12) {
        return Err(param("horizon", "second moment below squared mean"));
    }
    Ok((horizon.second() - start * start) / (2.0 * span) + carry / span)
}

/// Pure-jump kernel: `1/((M+1)(W^F+1)) - 1` before the birth, else zero.
pub fn alpha3(pre_birth: bool, m: f64, wf: f64) -> f64 {
    if pre_birth {
        1.0 / ((m + 1.0) * (wf + 1.0)) - 1.0
    } else {
        0.0
    }
}

/// State entering the kernels at one grid time.
#[derive(Debug, Clone, Copy)]
pub struct KernelState {
    pub lambda: f64,
    pub m: f64,
    pub wf: f64,
    pub beta: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// Bubble-noise kernel after the birth,
/// `((s - eta) / (L M) + k beta - mu) / sigma`.
pub fn alpha2(s: f64, eta: f64, st: &KernelState, k_decay: f64, vol_floor: f64) -> Result<f64> {
    let sigma = st.sigma.max(vol_floor);
    if !(sigma > 0.0) {
        return Err(Error::Degeneracy { s });
    }
    Ok(((s - eta) / (st.lambda * st.m) + k_decay * st.beta - st.mu) / sigma)
}

/// Fundamental-noise kernel.
///
/// Before the birth it cancels the fundamental drift and the compensated
/// jump, `-a/b - (2 x / b) pi L M / ((M+1)(W^F+1))`; afterwards it carries
/// the pricing correction, `-a/b - 2 (s - eta) / (b W^F)`.
pub fn alpha1(
    s: f64,
    eta: f64,
    pre_birth: bool,
    st: &KernelState,
    p: &ModelParams,
    pi: f64,
) -> f64 {
    let base = -p.a / p.b;
    if pre_birth {
        base - 2.0 * p.x_birth() / p.b * pi * st.lambda * st.m / ((st.m + 1.0) * (st.wf + 1.0))
    } else {
        base - 2.0 * (s - eta) / (p.b * st.wf)
    }
}

/// Flow settings for one evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSettings {
    pub t_eval: f64,
    /// Densities are followed up to `T - epsilon`.
    pub epsilon: f64,
    pub vol_floor: f64,
    /// Added to `eta` after it is computed; nonzero only for negative controls.
    pub eta_shift: f64,
    /// Added to `alpha1` everywhere; nonzero only for negative controls.
    pub alpha1_shift: f64,
}

impl FlowSettings {
    pub fn new(t_eval: f64, dt: f64) -> Self {
        Self {
            t_eval,
            epsilon: dt,
            vol_floor: VOL_FLOOR,
            eta_shift: 0.0,
            alpha1_shift: 0.0,
        }
    }
}

/// The three kernels on the grid points `first..=last` of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowKernels {
    pub t_eval: f64,
    pub eta: f64,
    /// Grid index of `t_eval`.
    pub first: usize,
    /// Grid index of `T - epsilon`.
    pub last: usize,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub alpha3: Vec<f64>,
    /// Points where `sigma` fell below the floor.
    pub degenerate: usize,
}

impl FlowKernels {
    /// Kernel arrays are indexed from `first`; this maps a grid index.
    pub fn at(&self, grid: usize) -> usize {
        grid - self.first
    }
}

fn jump_intensity(p: &ModelParams) -> f64 {
    p.pi_intensity
}

/// Evaluates the kernels along `tr` for the settings `fs`.
///
/// The birth must be known at `t_eval`: either it has already happened or
/// its date is deterministic.
pub fn flow_kernels(
    tr: &Trajectory,
    p: &ModelParams,
    horizon: &HorizonLaw,
    fs: &FlowSettings,
) -> Result<FlowKernels> {
    if !(p.b > 0.0) {
        return Err(param("b", "the measure flow needs b > 0"));
    }
    let first = tr
        .index_of(fs.t_eval)
        .ok_or_else(|| param("t_eval", "outside the simulation grid"))?;
    let end_time = tr.times[tr.len() - 1] - fs.epsilon;
    let last = tr
        .index_of(end_time)
        .filter(|&l| l >= first)
        .ok_or_else(|| param("epsilon", "leaves no grid after t_eval"))?;
    let birth = tr.birth.unwrap_or(usize::MAX);
    if birth > first && p.tau_mode != crate::params::TauMode::Deterministic {
        return Err(Error::Unsupported(
            "random birth time after the evaluation time".into(),
        ));
    }
    let pi = jump_intensity(p);
    let x = p.x_birth();
    let state = |i: usize| KernelState {
        lambda: tr.lambda[i],
        m: tr.m[i],
        wf: tr.wf[i],
        beta: tr.beta[i],
        mu: tr.mu[i],
        sigma: tr.sigma[i],
    };

    // carry: left-point quadrature of the pre-birth integrand on [t, tau)
    let carry: f64 = (first..birth.min(tr.len() - 1))
        .map(|i| {
            let st = state(i);
            st.wf * pi * x * st.lambda * st.m * (alpha3(true, st.m, st.wf) + 1.0) * tr.dt
        })
        .sum();
    let start = if birth == usize::MAX {
        horizon.mean()
    } else {
        tr.times[birth].max(fs.t_eval)
    };
    let eta_value = if birth == usize::MAX {
        // no birth before T: only the pre-birth branches are used
        f64::NAN
    } else {
        eta(start, horizon, carry)? + fs.eta_shift
    };

    let n = last - first + 1;
    let mut out = FlowKernels {
        t_eval: fs.t_eval,
        eta: eta_value,
        first,
        last,
        alpha1: Vec::with_capacity(n),
        alpha2: Vec::with_capacity(n),
        alpha3: Vec::with_capacity(n),
        degenerate: 0,
    };
    for i in first..=last {
        let s = tr.times[i];
        let st = state(i);
        let pre = i < birth;
        out.alpha3.push(alpha3(pre, st.m, st.wf));
        out.alpha1
            .push(alpha1(s, eta_value, pre, &st, p, pi) + fs.alpha1_shift);
        if pre {
            out.alpha2.push(0.0);
        } else {
            if !(st.sigma >= fs.vol_floor) {
                out.degenerate += 1;
            }
            out.alpha2
                .push(alpha2(s, eta_value, &st, p.k_decay, fs.vol_floor)?);
        }
    }
    Ok(out)
}

/// Largest normalized residual of the drift condition along the kernels'
/// range.
///
/// At each grid time the three drift terms (fundamental, bubble, jump) are
/// summed and divided by the sum of their absolute parts, so the result
/// measures cancellation relative to the size of the terms.
pub fn drift_check(k: &FlowKernels, tr: &Trajectory, p: &ModelParams) -> f64 {
    let birth = tr.birth.unwrap_or(usize::MAX);
    let pi = jump_intensity(p);
    let x = p.x_birth();
    let mut worst: f64 = 0.0;
    for i in k.first..=k.last {
        let j = k.at(i);
        let wf = tr.wf[i];
        let lm = tr.lambda[i] * tr.m[i];
        let fund = [wf * p.a, wf * p.b * k.alpha1[j]];
        let rest: [f64; 3] = if i >= birth {
            let sigma = tr.sigma[i].max(VOL_FLOOR);
            [
                2.0 * lm * tr.mu[i],
                2.0 * lm * sigma * k.alpha2[j],
                -2.0 * lm * p.k_decay * tr.beta[i],
            ]
        } else {
            [2.0 * pi * x * wf * lm * (k.alpha3[j] + 1.0), 0.0, 0.0]
        };
        let total: f64 = fund.iter().chain(&rest).sum();
        let scale: f64 = fund.iter().chain(&rest).map(|v| v.abs()).sum();
        if scale > 0.0 {
            worst = worst.max(total.abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eta_deterministic_horizon() {
        let law = HorizonLaw::Deterministic(3.0);
        assert_abs_diff_eq!(eta(1.0, &law, 0.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eta(0.0, &law, 0.0).unwrap(), 1.5, epsilon = 1e-15);
        let near = eta(3.0 - 1e-9, &law, 0.0).unwrap();
        assert_abs_diff_eq!(near, 3.0, epsilon = 1e-8);
        assert!(eta(3.0, &law, 0.0).is_err());
    }

    #[test]
    fn eta_centres_the_correction() {
        // int_start^T (s - eta) ds = -carry
        let law = HorizonLaw::Deterministic(3.0);
        for (start, carry) in [(0.0, 0.0), (0.4, 0.0), (0.5, 1.7), (2.0, -0.3)] {
            let e = eta(start, &law, carry).unwrap();
            let integral = (9.0 - start * start) / 2.0 - e * (3.0 - start);
            assert_abs_diff_eq!(integral, -carry, epsilon = 1e-12);
        }
    }

    #[test]
    fn eta_with_random_horizon_moments() {
        // T uniform on [2, 4]: E[T] = 3, E[T^2] = 28/3
        let law = HorizonLaw::Moments {
            mean: 3.0,
            second: 28.0 / 3.0,
        };
        let e = eta(1.0, &law, 0.0).unwrap();
        // E[int_1^T (s - e) ds] = (E[T^2] - 1)/2 - e (E[T] - 1)
        assert_abs_diff_eq!((28.0 / 3.0 - 1.0) / 2.0 - e * 2.0, 0.0, epsilon = 1e-12);
        assert!(e > 2.0);
    }

    #[test]
    fn alpha3_branches() {
        assert_eq!(alpha3(false, 10.0, 1.0), 0.0);
        assert_abs_diff_eq!(alpha3(true, 10.0, 1.0), 1.0 / 22.0 - 1.0, epsilon = 1e-15);
        let v = alpha3(true, 1e12, 1.0);
        assert!(v > -1.0 && v.abs() <= 1.0);
    }

    fn state() -> KernelState {
        KernelState {
            lambda: 0.5,
            m: 10.0,
            wf: 1.3,
            beta: 2.0e4,
            mu: 3000.0,
            sigma: 800.0,
        }
    }

    #[test]
    fn alpha2_examples() {
        let st = KernelState {
            beta: 0.0,
            mu: 0.0,
            ..state()
        };
        assert_eq!(alpha2(1.5, 1.5, &st, 0.1, VOL_FLOOR).unwrap(), 0.0);
        let st = state();
        let hand = (0.7 - 1.5) / (0.5 * 10.0 * 800.0) + 0.1 * 2.0e4 / 800.0 - 3000.0 / 800.0;
        assert_abs_diff_eq!(
            alpha2(0.7, 1.5, &st, 0.1, VOL_FLOOR).unwrap(),
            hand,
            epsilon = 1e-14
        );
        let flat = KernelState { sigma: 0.0, ..st };
        assert!(alpha2(0.7, 1.5, &flat, 0.1, VOL_FLOOR).unwrap().is_finite());
        assert!(matches!(
            alpha2(0.7, 1.5, &flat, 0.1, 0.0),
            Err(Error::Degeneracy { .. })
        ));
    }

    #[test]
    fn alpha1_branches() {
        let p = ModelParams::default();
        let st = state();
        assert_abs_diff_eq!(
            alpha1(0.3, 1.5, true, &st, &p, 0.0),
            -p.a / p.b,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            alpha1(1.5, 1.5, false, &st, &p, 0.0),
            -p.a / p.b,
            epsilon = 1e-15
        );
        let hand = -0.25 - 2.0 * (0.5 - 1.5) / (0.2 * 1.3);
        assert_abs_diff_eq!(alpha1(0.5, 1.5, false, &st, &p, 0.0), hand, epsilon = 1e-14);
    }
}
