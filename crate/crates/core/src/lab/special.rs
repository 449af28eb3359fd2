//! Exponential integral and the incomplete gamma function extended to
//! negative arguments.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const TOL: f64 = 1e-15;
const MAX_TERMS: usize = 100_000;

/// `Ei(x) = -int_{-x}^inf e^{-u}/u du` (principal value for `x > 0`).
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if x == 0.0 || x.is_nan() {
        return Err(Error::Numeric(format!("Ei undefined at {x}")));
    }
    if x < 0.0 {
        return Ok(-exp_integral_e1(-x)?);
    }
    if x > 50.0 {
        ei_asymptotic(x)
    } else {
        ei_series(x)
    }
}

/// `e^x/x sum k!/x^k`, truncated at the smallest term.
fn ei_asymptotic(x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * k as f64 / x;
        if next > term {
            break;
        }
        term = next;
        sum += term;
        if term < TOL * sum {
            break;
        }
    }
    Ok(x.exp() / x * sum)
}

fn ei_series(x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_TERMS {
        term *= x / k as f64;
        let add = term / k as f64;
        sum += add;
        if add.abs() < TOL * sum.abs() {
            return Ok(EULER_GAMMA + x.ln() + sum);
        }
    }
    Err(Error::Numeric(format!("Ei series did not converge at {x}")))
}

/// `E1(x) = int_x^inf e^{-u}/u du` for `x > 0`.
fn exp_integral_e1(x: f64) -> Result<f64> {
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..MAX_TERMS {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < TOL * sum.abs().max(1e-300) {
                return Ok(-EULER_GAMMA - x.ln() - sum);
            }
        }
        return Err(Error::Numeric(format!("E1 series did not converge at {x}")));
    }
    // modified Lentz on the continued fraction e^-x / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < TOL {
            return Ok(h * (-x).exp());
        }
    }
    Err(Error::Numeric(format!(
        "E1 continued fraction stalled at {x}"
    )))
}

/// Natural log of the gamma function for `a > 0` (Lanczos, g = 7).
pub fn ln_gamma(a: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if a < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * a).sin()).abs().ln() - ln_gamma(1.0 - a);
    }
    let x = a - 1.0;
    let t = x + 7.5;
    let mut s = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        s += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + s.ln()
}

/// Regularized lower incomplete gamma `P(a, x)` for `a > 0`, `x >= 0`.
fn lower_regularized(a: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let log_pre = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        for n in 1..MAX_TERMS {
            term *= x / (a + n as f64);
            sum += term;
            if term < TOL * sum {
                return Ok(sum * log_pre.exp());
            }
        }
        return Err(Error::Numeric(format!(
            "gamma series stalled at ({a}, {x})"
        )));
    }
    Ok(1.0 - upper_continued_fraction(a, x)? * log_pre.exp())
}

fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < TOL {
            return Ok(h);
        }
    }
    Err(Error::Numeric(format!(
        "gamma fraction stalled at ({a}, {x})"
    )))
}

/// `int_0^w e^u u^{a-1} du` for `a > 0`, `w >= 0`.
fn rising_integral(a: f64, w: f64) -> Result<f64> {
    if w == 0.0 {
        return Ok(0.0);
    }
    // sum_n w^{a+n} / (n! (a+n)), in logs to survive large w
    let lw = w.ln();
    let mut log_term = a * lw; // log(w^{a+n}/n!)
    let mut sum = 0.0;
    let mut scale = f64::NEG_INFINITY;
    let mut terms = Vec::new();
    for n in 0..MAX_TERMS {
        let lt = log_term - (a + n as f64).ln();
        terms.push(lt);
        scale = scale.max(lt);
        if n as f64 > w && lt < scale + TOL.ln() {
            for t in &terms {
                sum += (t - scale).exp();
            }
            return Ok(sum * scale.exp());
        }
        log_term += lw - ((n + 1) as f64).ln();
    }
    Err(Error::Numeric(format!(
        "rising integral stalled at ({a}, {w})"
    )))
}

/// `int_z^inf e^{-t} |t|^{a-1} dt` for `a > 0` and any real `z`.
///
/// For `z < 0` this is `Gamma(a) + int_0^{|z|} e^u u^{a-1} du`.
pub fn incomplete_gamma_ext(a: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || !z.is_finite() {
        return Err(Error::Numeric(format!(
            "extended incomplete gamma needs a > 0 and finite z, got ({a}, {z})"
        )));
    }
    let gamma = ln_gamma(a).exp();
    if z >= 0.0 {
        Ok(gamma * (1.0 - lower_regularized(a, z)?))
    } else {
        Ok(gamma + rising_integral(a, -z)?)
    }
}

/// `int_{w1}^{w2} e^u u^{a-1} du` for `w1, w2 > 0` and any real `a`.
///
/// For `a > -1` this is `(w2^a - w1^a)/a` plus the series of
/// `int (e^u - 1) u^{a-1}`, each power difference taken through `expm1`,
/// so nothing cancels near `a = 0` or `w1 = w2`. Lower orders step up by
/// parts.
pub fn rising_difference(a: f64, w1: f64, w2: f64) -> Result<f64> {
    if !(w1 > 0.0 && w2 > 0.0) || !a.is_finite() {
        return Err(Error::Numeric(format!(
            "rising difference needs positive limits, got ({a}, {w1}, {w2})"
        )));
    }
    if w2 < w1 {
        return Ok(-rising_difference(a, w2, w1)?);
    }
    if w1 == w2 {
        return Ok(0.0);
    }
    if a <= -1.0 {
        let up = rising_difference(a + 1.0, w1, w2)?;
        let ends = (w2 + a * w2.ln()).exp() - (w1 + a * w1.ln()).exp();
        return Ok((ends - up) / a);
    }
    let lr = (w2 / w1).ln();
    // w1^p expm1(p ln(w2/w1)) / p, with the p -> 0 limit
    let power_diff = |p: f64| {
        if p.abs() < 1e-300 {
            lr
        } else {
            (p * w1.ln()).exp() * (p * lr).exp_m1() / p
        }
    };
    let mut sum = power_diff(a);
    let mut inv_fact = 1.0;
    for n in 1..MAX_TERMS {
        inv_fact /= n as f64;
        let term = inv_fact * power_diff(a + n as f64);
        sum += term;
        if n as f64 > w2 && term.abs() < TOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Numeric(format!(
        "rising difference stalled at ({a}, {w1}, {w2})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ei_series_oracle_at_one() {
        // independent sum of 1/(k k!) plus gamma
        let mut s = 0.0;
        let mut fact = 1.0;
        for k in 1..30 {
            fact *= k as f64;
            s += 1.0 / (k as f64 * fact);
        }
        assert_relative_eq!(
            exp_integral_ei(1.0).unwrap(),
            EULER_GAMMA + s,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            exp_integral_ei(1.0).unwrap(),
            1.895_117_816_355_936_8,
            max_relative = 1e-14
        );
    }

    #[test]
    fn ei_branches_agree_with_reference_values() {
        // reference values of Ei and -E1
        assert_relative_eq!(
            exp_integral_ei(-1.0).unwrap(),
            -0.219_383_934_395_520_3,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            exp_integral_ei(-3.0).unwrap(),
            -0.013_048_381_094_197_04,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            exp_integral_ei(10.0).unwrap(),
            2_492.228_976_241_877_7,
            max_relative = 1e-13
        );
        // both branches at the same points around the switch
        for x in [40.0, 50.0, 60.0] {
            assert_relative_eq!(
                ei_series(x).unwrap(),
                ei_asymptotic(x).unwrap(),
                max_relative = 1e-13
            );
        }
        assert!(exp_integral_ei(0.0).is_err());
    }

    #[test]
    fn gamma_ext_basic() {
        assert_relative_eq!(
            incomplete_gamma_ext(1.0, 0.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            incomplete_gamma_ext(1.0, 2.0).unwrap(),
            (-2.0f64).exp(),
            max_relative = 1e-13
        );
        // a = 2: int_z^inf e^-t |t| dt; for z = -1: 1 + int_0^1 e^u u du = 1 + 1 = 2
        assert_relative_eq!(
            incomplete_gamma_ext(2.0, -1.0).unwrap(),
            2.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(ln_gamma(5.0), 24f64.ln(), max_relative = 1e-14);
        assert!(incomplete_gamma_ext(0.0, 1.0).is_err());
        // against quadrature of the real form on [-1, 0] plus Gamma(2) = 1
        let q =
            crate::lab::quad::integrate(|t: f64| (-t).exp() * t.abs(), -1.0, 0.0, 1e-14).unwrap();
        assert_relative_eq!(
            incomplete_gamma_ext(2.0, -1.0).unwrap(),
            1.0 + q,
            max_relative = 1e-13
        );
        // non-integer order
        let q =
            crate::lab::quad::integrate(|t: f64| (-t).exp() * t.abs().powf(0.5), -3.0, 0.0, 1e-14)
                .unwrap();
        let gamma_15 = std::f64::consts::PI.sqrt() / 2.0;
        assert_relative_eq!(
            incomplete_gamma_ext(1.5, -3.0).unwrap(),
            gamma_15 + q,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            incomplete_gamma_ext(1.5, 2.0).unwrap(),
            crate::lab::quad::integrate(|t: f64| (-t).exp() * t.sqrt(), 2.0, 60.0, 1e-14).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rising_differences() {
        // int_1^2 e^w w^{-2} dw = [e^w (-1/w)] + int e^w / w = (-e^2/2 + e) + Ei(2) - Ei(1)
        let got = rising_difference(-1.0, 1.0, 2.0).unwrap();
        let want = -(2f64.exp()) / 2.0 + 1f64.exp() + exp_integral_ei(2.0).unwrap()
            - exp_integral_ei(1.0).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-13);
        // order zero is the Ei difference
        let ei = exp_integral_ei(3.0).unwrap() - exp_integral_ei(0.5).unwrap();
        assert_relative_eq!(
            rising_difference(0.0, 0.5, 3.0).unwrap(),
            ei,
            max_relative = 1e-13
        );
        // positive order against the extended incomplete gamma
        let g = incomplete_gamma_ext(2.5, -3.0).unwrap() - incomplete_gamma_ext(2.5, -0.5).unwrap();
        assert_relative_eq!(
            rising_difference(2.5, 0.5, 3.0).unwrap(),
            g,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            rising_difference(-2.3, 3.0, 0.5).unwrap(),
            -rising_difference(-2.3, 0.5, 3.0).unwrap()
        );
        let q =
            crate::lab::quad::integrate(|u: f64| u.exp() * u.powf(-3.3), 0.5, 3.0, 1e-14).unwrap();
        assert_relative_eq!(
            rising_difference(-2.3, 0.5, 3.0).unwrap(),
            q,
            max_relative = 1e-12
        );
    }
}
