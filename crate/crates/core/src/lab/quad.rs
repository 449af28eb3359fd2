//! Gauss–Legendre quadrature and the endpoint divergence test.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const GL_ORDER: usize = 20;

/// Nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The rule on `[-1, 1]` with its spectral integration matrix:
/// `cum[i][j] = int_{-1}^{x_i} l_j(t) dt` for the Lagrange basis `l_j` on
/// the nodes.
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub cum: Vec<Vec<f64>>,
}

fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n > 0 {
        p[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

pub fn spectral_rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let (nodes, weights) = gauss_legendre(n);
        // l_j(t) = sum_m w_j P_m(x_j) P_m(t) (2m+1)/2, integrated term by term
        let at_nodes: Vec<Vec<f64>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let mut cum = vec![vec![0.0; n]; n];
        for (i, &xi) in nodes.iter().enumerate() {
            let p = legendre_all(n, xi);
            let integral = |m: usize| {
                if m == 0 {
                    xi + 1.0
                } else {
                    (p[m + 1] - p[m - 1]) / (2.0 * m as f64 + 1.0)
                }
            };
            for j in 0..n {
                cum[i][j] = (0..n)
                    .map(|m| {
                        weights[j] * at_nodes[j][m] * (2.0 * m as f64 + 1.0) / 2.0 * integral(m)
                    })
                    .sum();
            }
        }
        Rule {
            nodes,
            weights,
            cum,
        }
    })
}

/// Fixed 20-point rule on `[a, b]`.
pub fn gl(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let Rule {
        nodes: x,
        weights: w,
        ..
    } = spectral_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
        * half
}

/// Adaptive bisection on the 20-point rule to relative tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gl(&mut f, a, b);
    let scale = whole.abs();
    let v = refine(&mut f, a, b, whole, tol, scale, 0)?;
    if v.is_nan() {
        return Err(Error::Numeric(format!("integral on [{a}, {b}] is NaN")));
    }
    Ok(v)
}

fn refine(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    scale: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = gl(f, a, m);
    let right = gl(f, m, b);
    let both = left + right;
    if !both.is_finite() {
        return Ok(both);
    }
    let scale = scale.max(both.abs());
    if (both - whole).abs() <= tol * scale || (both - whole).abs() < 1e-300 {
        return Ok(both);
    }
    if depth >= 40 {
        return Err(Error::Numeric(format!(
            "quadrature did not settle on [{a}, {b}]"
        )));
    }
    Ok(refine(f, a, m, left, tol, scale, depth + 1)?
        + refine(f, m, b, right, tol, scale, depth + 1)?)
}

/// Whether a positive series (an integral split over a ladder of segments)
/// converges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    /// Converges; carries `ln` of the total, `-inf` for a zero total.
    Finite(f64),
    Infinite,
    Inconclusive,
}

impl Limit {
    pub fn is_finite(&self) -> Option<bool> {
        match self {
            Limit::Finite(_) => Some(true),
            Limit::Infinite => Some(false),
            Limit::Inconclusive => None,
        }
    }
}

const CONTRACT: f64 = 1e-14;
const BLOWUP: f64 = 1e12;
const RATIO_ONE: f64 = 1e-8;
const RATIO_STABLE: f64 = 1e-4;
const STABLE_RUN: usize = 4;

/// Divergence test on a sequence of `ln` segment integrals.
///
/// Finite once the latest increment falls below `1e-14` of the running sum,
/// or once the increment ratio settles below one (geometric tail added).
/// Infinite if an increment overflows, if the sum passes `1e12` while
/// increments stop shrinking, or if the ratio settles at or above one.
/// Returns the verdict and how many segments it consumed.
pub fn classify_series(log_inc: &[f64]) -> (Limit, usize) {
    let mut log_sum = f64::NEG_INFINITY;
    let mut ratios: Vec<f64> = Vec::new();
    for (k, &li) in log_inc.iter().enumerate() {
        if li.is_nan() || li == f64::INFINITY {
            return (Limit::Infinite, k + 1);
        }
        log_sum = log_add(log_sum, li);
        if li == f64::NEG_INFINITY {
            // exact zero segment
            if k >= STABLE_RUN
                && log_inc[k + 1 - STABLE_RUN..=k]
                    .iter()
                    .all(|v| *v == f64::NEG_INFINITY)
            {
                return (Limit::Finite(log_sum), k + 1);
            }
            ratios.clear();
            continue;
        }
        if k > 0 && li - log_sum < CONTRACT.ln() {
            return (Limit::Finite(log_sum), k + 1);
        }
        if k > 0 && log_inc[k - 1].is_finite() {
            ratios.push(li - log_inc[k - 1]);
        }
        if log_sum > BLOWUP.ln() && ratios.last().is_some_and(|&r| r >= -RATIO_ONE) {
            return (Limit::Infinite, k + 1);
        }
        if ratios.len() >= STABLE_RUN {
            let tail = &ratios[ratios.len() - STABLE_RUN..];
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi - lo < RATIO_STABLE {
                let d = tail[STABLE_RUN - 1];
                if d >= -RATIO_ONE {
                    return (Limit::Infinite, k + 1);
                }
                if d < -1e-3 {
                    let q = d.exp();
                    let rest = li + d - (1.0 - q).ln();
                    return (Limit::Finite(log_add(log_sum, rest)), k + 1);
                }
            }
        }
    }
    (Limit::Inconclusive, log_inc.len())
}

/// `ln(e^a + e^b)`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a >= b`.
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}
