//! Scale functions, endpoint tests and the martingale verdict for
//! `E(int f(Y) dB)` with `dY = mu(Y) dt + sigma(Y) dB` on `J = (l, r)`.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use super::quad::{classify_series, integrate, log_add, spectral_rule, Limit, GL_ORDER};
use crate::error::{param, Error, Result};

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const QUAD_TOL: f64 = 1e-13;
const MAX_SEGMENTS: usize = 1100;
const FAR_AWAY: f64 = 1e100;
const NEAR_ENDPOINT: f64 = 1e-290;

type Ratio<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

#[derive(Clone)]
pub struct DiffusionSpec {
    pub mu: Coefficient,
    pub sigma: Coefficient,
    pub f: Coefficient,
    pub l: f64,
    pub r: f64,
    pub c: f64,
}

impl fmt::Debug for DiffusionSpec {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("DiffusionSpec")
            .field("l", &self.l)
            .field("r", &self.r)
            .field("c", &self.c)
            .finish_non_exhaustive()
    }
}

impl DiffusionSpec {
    pub fn new(
        mu: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        l: f64,
        r: f64,
        c: f64,
    ) -> Result<Self> {
        let spec = Self {
            mu: Arc::new(mu),
            sigma: Arc::new(sigma),
            f: Arc::new(f),
            l,
            r,
            c,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.l && x < self.r
    }

    /// Checks the interval and samples local integrability of `1/sigma^2`,
    /// `mu/sigma^2` and `f^2/sigma^2` on a compact around `c`.
    pub fn validate(&self) -> Result<()> {
        if self.l.is_nan() || self.r.is_nan() || !(self.l < self.r) {
            return Err(param("l", "need l < r"));
        }
        if !self.c.is_finite() || !self.contains(self.c) {
            return Err(param("c", "reference point must lie inside (l, r)"));
        }
        let (a, b) = (self.inner_point(Side::Left), self.inner_point(Side::Right));
        for i in 0..=64 {
            let x = a + (b - a) * i as f64 / 64.0;
            let s = (self.sigma)(x);
            if !s.is_finite() || s == 0.0 {
                return Err(param("sigma", "must be finite and non-zero on J"));
            }
        }
        let s2 = |x: f64| {
            let s = (self.sigma)(x);
            s * s
        };
        let checks: [(&str, Ratio); 3] = [
            ("sigma", Box::new(|x| 1.0 / s2(x))),
            ("mu", Box::new(|x| (self.mu)(x) / s2(x))),
            ("f", Box::new(|x| (self.f)(x).powi(2) / s2(x))),
        ];
        for (key, g) in checks {
            let v = integrate(|x| g(x).abs(), a, b, 1e-8);
            if !v.as_ref().is_ok_and(|v| v.is_finite()) {
                return Err(param(key, "ratio to sigma^2 is not locally integrable"));
            }
        }
        Ok(())
    }

    /// A point between `c` and the endpoint on `side`, used for the
    /// integrability sample.
    fn inner_point(&self, side: Side) -> f64 {
        let e = side.endpoint(self);
        if e.is_finite() {
            self.c + 0.5 * (e - self.c)
        } else {
            self.c + side.sign() * self.c.abs().max(1.0)
        }
    }

    /// `2 mu / sigma^2`, plus `2 f / sigma` for the tilted density.
    fn log_slope(&self, x: f64, tilted: bool) -> f64 {
        let s = (self.sigma)(x);
        let mut g = 2.0 * (self.mu)(x) / (s * s);
        if tilted {
            g += 2.0 * (self.f)(x) / s;
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    fn endpoint(self, spec: &DiffusionSpec) -> f64 {
        match self {
            Side::Left => spec.l,
            Side::Right => spec.r,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

fn check_inside(spec: &DiffusionSpec, x: f64) -> Result<()> {
    if spec.contains(x) {
        Ok(())
    } else {
        Err(Error::Numeric(format!(
            "{x} lies outside ({}, {})",
            spec.l, spec.r
        )))
    }
}

fn log_density(spec: &DiffusionSpec, x: f64, tilted: bool) -> Result<f64> {
    check_inside(spec, x)?;
    if x == spec.c {
        return Ok(0.0);
    }
    Ok(-integrate(
        |y| spec.log_slope(y, tilted),
        spec.c,
        x,
        QUAD_TOL,
    )?)
}

/// `rho(x) = exp(-int_c^x 2 mu / sigma^2)`.
pub fn scale_density(spec: &DiffusionSpec, x: f64) -> Result<f64> {
    Ok(log_density(spec, x, false)?.exp())
}

/// `rho~(x) = rho(x) exp(-int_c^x 2 f / sigma)`.
pub fn tilted_density(spec: &DiffusionSpec, x: f64) -> Result<f64> {
    Ok(log_density(spec, x, true)?.exp())
}

/// `s(x)` or `s~(x)`, the integral from `c` of the chosen density, at an
/// interior point.
pub fn scale_function(spec: &DiffusionSpec, x: f64, tilted: bool) -> Result<f64> {
    check_inside(spec, x)?;
    if x == spec.c {
        return Ok(0.0);
    }
    let mut failure = None;
    let v = integrate(
        |y| match log_density(spec, y, tilted) {
            Ok(l) => l.exp(),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        spec.c,
        x,
        QUAD_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    v
}

/// Limit of a scale function at an endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointValue {
    Finite(f64),
    PosInfinity,
    NegInfinity,
    Inconclusive,
}

impl EndpointValue {
    pub fn is_finite(&self) -> Option<bool> {
        match self {
            EndpointValue::Finite(_) => Some(true),
            EndpointValue::PosInfinity | EndpointValue::NegInfinity => Some(false),
            EndpointValue::Inconclusive => None,
        }
    }

    fn from_limit(limit: Limit, side: Side) -> Self {
        match (limit, side) {
            (Limit::Finite(l), _) => EndpointValue::Finite(side.sign() * l.exp()),
            (Limit::Infinite, Side::Right) => EndpointValue::PosInfinity,
            (Limit::Infinite, Side::Left) => EndpointValue::NegInfinity,
            (Limit::Inconclusive, _) => EndpointValue::Inconclusive,
        }
    }
}

impl Serialize for EndpointValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EndpointValue::Finite(v) => s.serialize_f64(*v),
            EndpointValue::PosInfinity => s.serialize_str("+inf"),
            EndpointValue::NegInfinity => s.serialize_str("-inf"),
            EndpointValue::Inconclusive => s.serialize_str("inconclusive"),
        }
    }
}

/// What a walk toward an endpoint measures besides the density mass.
#[derive(Clone, Copy)]
enum Weight {
    /// `1 / sigma^2`
    Exit,
    /// `f^2 / sigma^2`
    Good,
}

impl Weight {
    fn log_at(self, spec: &DiffusionSpec, x: f64) -> f64 {
        let s = (spec.sigma)(x);
        match self {
            Weight::Exit => -2.0 * s.abs().ln(),
            Weight::Good => 2.0 * ((spec.f)(x).abs().ln() - s.abs().ln()),
        }
    }
}

/// Ladder from `c` toward the endpoint: halving distances for a finite
/// endpoint, doubling steps for an infinite one.
fn ladder(spec: &DiffusionSpec, side: Side) -> Vec<f64> {
    let e = side.endpoint(spec);
    let c = spec.c;
    let mut pts = vec![c];
    if e.is_finite() {
        let gap = e - c;
        let mut k = 1;
        while k <= MAX_SEGMENTS {
            let x = e - gap * 0.5f64.powi(k as i32);
            if x == *pts.last().unwrap() || (x - e).abs() < NEAR_ENDPOINT {
                break;
            }
            pts.push(x);
            k += 1;
        }
    } else {
        let h = side.sign() * c.abs().max(1.0);
        let mut k = 1;
        while k <= MAX_SEGMENTS {
            let x = c + h * (2f64.powi(k as i32) - 1.0);
            if x.abs() > FAR_AWAY {
                break;
            }
            pts.push(x);
            k += 1;
        }
    }
    pts
}

/// Per-segment `ln` integrals toward one endpoint: the density mass and,
/// for each weight `w`, `int rho(u) int_c^u w / rho dy du`, which equals
/// the integral of `|s(e) - s(y)| w(y) / rho(y)` by Fubini.
struct Walk {
    mass: Vec<f64>,
    weighted: Vec<Vec<f64>>,
}

fn walk(spec: &DiffusionSpec, side: Side, tilted: bool, weights: &[Weight]) -> Walk {
    let pts = ladder(spec, side);
    let mut out = Walk {
        mass: Vec::new(),
        weighted: vec![Vec::new(); weights.len()],
    };
    let mut st = WalkState {
        spec,
        tilted,
        weights,
        lr_start: 0.0,
        lv_start: vec![f64::NEG_INFINITY; weights.len()],
        seg_mass: f64::NEG_INFINITY,
        seg_weighted: vec![f64::NEG_INFINITY; weights.len()],
    };
    for seg in pts.windows(2) {
        st.seg_mass = f64::NEG_INFINITY;
        st.seg_weighted.fill(f64::NEG_INFINITY);
        st.piece(seg[0], seg[1], 0);
        out.mass.push(st.seg_mass);
        for (dst, v) in out.weighted.iter_mut().zip(&st.seg_weighted) {
            dst.push(*v);
        }
        let decided = |s: &[f64]| classify_series(s).0 != Limit::Inconclusive;
        if decided(&out.mass) && out.weighted.iter().all(|w| decided(w)) {
            break;
        }
    }
    out
}

/// Largest spread of a log-integrand across one piece before it is split.
const LOG_SPAN: f64 = 4.0;
const MAX_SPLITS: u32 = 16;

struct WalkState<'a> {
    spec: &'a DiffusionSpec,
    tilted: bool,
    weights: &'a [Weight],
    lr_start: f64,
    lv_start: Vec<f64>,
    seg_mass: f64,
    seg_weighted: Vec<f64>,
}

fn spread(v: &[f64]) -> f64 {
    let finite = v.iter().filter(|x| x.is_finite());
    let hi = finite.clone().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = finite.cloned().fold(f64::INFINITY, f64::min);
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

impl WalkState<'_> {
    /// Accumulates `[a, b]`, splitting it while the integrands vary too much
    /// for one spectral rule.
    fn piece(&mut self, a: f64, b: f64, depth: u32) {
        let rule = spectral_rule();
        let spec = self.spec;
        let half = 0.5 * (b - a);
        let ys: Vec<f64> = rule
            .nodes
            .iter()
            .map(|t| 0.5 * (a + b) + half * t)
            .collect();
        let slopes: Vec<f64> = ys.iter().map(|&y| spec.log_slope(y, self.tilted)).collect();
        let lr: Vec<f64> = (0..GL_ORDER)
            .map(|i| {
                let acc: f64 = (0..GL_ORDER).map(|j| rule.cum[i][j] * slopes[j]).sum();
                self.lr_start - half * acc
            })
            .collect();
        let lqs: Vec<Vec<f64>> = self
            .weights
            .iter()
            .map(|w| {
                ys.iter()
                    .zip(&lr)
                    .map(|(&y, &l)| w.log_at(spec, y) - l)
                    .collect()
            })
            .collect();
        let wide = spread(&lr) > LOG_SPAN || lqs.iter().any(|q| spread(q) > LOG_SPAN);
        if wide && depth < MAX_SPLITS {
            let m = 0.5 * (a + b);
            self.piece(a, m, depth + 1);
            self.piece(m, b, depth + 1);
            return;
        }

        let lr_end = self.lr_start
            - half
                * rule
                    .weights
                    .iter()
                    .zip(&slopes)
                    .map(|(w, g)| w * g)
                    .sum::<f64>();
        let log_h = half.abs().ln();
        let habs = half.abs();
        let lw: Vec<f64> = rule.weights.iter().map(|w| w.ln() + log_h).collect();

        let mass: Vec<f64> = (0..GL_ORDER).map(|i| lw[i] + lr[i]).collect();
        self.seg_mass = log_add(self.seg_mass, log_sum(&mass));

        for (k, lq) in lqs.iter().enumerate() {
            let lv0 = self.lv_start[k];
            let shift = lq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (piece, lv_end) = if shift.is_finite() {
                let q: Vec<f64> = lq.iter().map(|v| (v - shift).exp()).collect();
                let terms: Vec<f64> = (0..GL_ORDER)
                    .map(|i| {
                        let cum: f64 =
                            (0..GL_ORDER).map(|j| rule.cum[i][j] * q[j]).sum::<f64>() * habs;
                        lw[i] + lr[i] + log_add(lv0, cum.max(0.0).ln() + shift)
                    })
                    .collect();
                let total: f64 =
                    rule.weights.iter().zip(&q).map(|(w, q)| w * q).sum::<f64>() * habs;
                (log_sum(&terms), log_add(lv0, total.ln() + shift))
            } else if shift == f64::INFINITY {
                (f64::INFINITY, f64::INFINITY)
            } else {
                let terms: Vec<f64> = (0..GL_ORDER).map(|i| lw[i] + lr[i] + lv0).collect();
                (log_sum(&terms), lv0)
            };
            self.seg_weighted[k] = log_add(self.seg_weighted[k], piece);
            self.lv_start[k] = lv_end;
        }
        self.lr_start = lr_end;
    }
}

fn log_sum(v: &[f64]) -> f64 {
    if v.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return f64::INFINITY;
    }
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Both conditions must be decided for a definite answer.
fn both(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

/// Everything measured at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndpointReport {
    pub side: Side,
    pub s: EndpointValue,
    pub s_tilde: EndpointValue,
    /// Exit condition: `s~` finite at the endpoint with an integrable tail.
    pub exit: Option<bool>,
    /// Good-endpoint condition in the plain form.
    pub good_plain: Option<bool>,
    /// The same condition written with the tilted density.
    pub good_tilted: Option<bool>,
}

impl EndpointReport {
    /// Agreed good-endpoint verdict; `None` if either form is undecided or
    /// the two forms disagree.
    pub fn good(&self) -> Option<bool> {
        match (self.good_plain, self.good_tilted) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn forms_agree(&self) -> bool {
        self.good_plain.is_some() && self.good_plain == self.good_tilted
    }
}

pub fn analyze_endpoint(spec: &DiffusionSpec, side: Side) -> EndpointReport {
    let plain = walk(spec, side, false, &[Weight::Good]);
    let tilted = walk(spec, side, true, &[Weight::Exit, Weight::Good]);
    let lim = |s: &[f64]| classify_series(s).0;
    let s = EndpointValue::from_limit(lim(&plain.mass), side);
    let s_tilde = EndpointValue::from_limit(lim(&tilted.mass), side);
    EndpointReport {
        side,
        s,
        s_tilde,
        exit: both(s_tilde.is_finite(), lim(&tilted.weighted[0]).is_finite()),
        good_plain: both(s.is_finite(), lim(&plain.weighted[0]).is_finite()),
        good_tilted: both(s_tilde.is_finite(), lim(&tilted.weighted[1]).is_finite()),
    }
}

/// Whether the exit condition holds at `side`; `None` when undecided.
pub fn endpoint_exit(spec: &DiffusionSpec, side: Side) -> Option<bool> {
    analyze_endpoint(spec, side).exit
}

/// Good-endpoint condition cross-checked between its two forms.
pub fn endpoint_good(spec: &DiffusionSpec, side: Side) -> Option<bool> {
    analyze_endpoint(spec, side).good()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Martingale,
    StrictLocal,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Martingale => "martingale",
            Verdict::StrictLocal => "strict-local",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FellerReport {
    pub s_r: EndpointValue,
    pub s_l: EndpointValue,
    pub st_r: EndpointValue,
    pub st_l: EndpointValue,
    pub exit_r: Option<bool>,
    pub exit_l: Option<bool>,
    pub good_r: Option<bool>,
    pub good_l: Option<bool>,
    pub verdict: Verdict,
    /// The two forms of the good-endpoint condition agree at both ends.
    pub good_forms_agree: bool,
    pub horizon: f64,
}

/// `Some(true)` when the endpoint is harmless, `Some(false)` when it breaks
/// the martingale property.
fn endpoint_ok(e: &EndpointReport) -> Option<bool> {
    match e.exit? {
        false => Some(true),
        true => e.good(),
    }
}

/// Martingale verdict on `[0, horizon]`; the criterion does not depend on
/// the horizon, which is recorded for the report.
pub fn classify_martingale(spec: &DiffusionSpec, horizon: f64) -> Result<FellerReport> {
    spec.validate()?;
    if !(horizon > 0.0) {
        return Err(param("horizon", "must be > 0"));
    }
    let right = analyze_endpoint(spec, Side::Right);
    let left = analyze_endpoint(spec, Side::Left);
    let verdict = match (endpoint_ok(&right), endpoint_ok(&left)) {
        (Some(true), Some(true)) => Verdict::Martingale,
        (Some(false), _) | (_, Some(false)) => Verdict::StrictLocal,
        _ => Verdict::Inconclusive,
    };
    Ok(FellerReport {
        s_r: right.s,
        s_l: left.s,
        st_r: right.s_tilde,
        st_l: left.s_tilde,
        exit_r: right.exit,
        exit_l: left.exit,
        good_r: right.good(),
        good_l: left.good(),
        verdict,
        good_forms_agree: right.forms_agree() && left.forms_agree(),
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::gbm::{gbm_inverse, gbm_spec};
    use approx::assert_relative_eq;

    fn brownian(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> DiffusionSpec {
        DiffusionSpec::new(|_| 0.0, |_| 1.0, f, f64::NEG_INFINITY, f64::INFINITY, 0.0).unwrap()
    }

    #[test]
    fn reference_point_values_are_exact() {
        let spec = gbm_inverse(0.3, 0.7).unwrap();
        assert_eq!(scale_density(&spec, 1.0).unwrap(), 1.0);
        assert_eq!(tilted_density(&spec, 1.0).unwrap(), 1.0);
        assert_eq!(scale_function(&spec, 1.0, false).unwrap(), 0.0);
        assert_eq!(scale_function(&spec, 1.0, true).unwrap(), 0.0);
    }

    #[test]
    fn gbm_densities() {
        let spec = gbm_inverse(1.0, 1.0).unwrap();
        assert_relative_eq!(
            scale_density(&spec, 3.0).unwrap(),
            1.0 / 9.0,
            max_relative = 1e-12
        );
        let want = 3f64.powi(-2) * (2.0f64 * (1.0 / 3.0 - 1.0)).exp();
        assert_relative_eq!(
            tilted_density(&spec, 3.0).unwrap(),
            want,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            scale_function(&spec, 2.0, false).unwrap(),
            0.5,
            max_relative = 1e-12
        );
        assert!(scale_density(&spec, -1.0).is_err());
    }

    #[test]
    fn brownian_motion_has_no_exit() {
        let spec = brownian(|_| 0.0);
        assert_eq!(endpoint_exit(&spec, Side::Left), Some(false));
        assert_eq!(endpoint_exit(&spec, Side::Right), Some(false));
        let rep = classify_martingale(&spec, 1.0).unwrap();
        assert_eq!(rep.s_r, EndpointValue::PosInfinity);
        assert_eq!(rep.s_l, EndpointValue::NegInfinity);
        assert_eq!(rep.verdict, Verdict::Martingale);
    }

    #[test]
    fn zero_integrand_is_good_where_scale_is_finite() {
        // gamma0 = 1: s(inf) = 1 finite, s(0) infinite
        let spec = gbm_spec(1.0, 1.0, |_| 0.0).unwrap();
        let right = analyze_endpoint(&spec, Side::Right);
        assert_eq!(right.s, EndpointValue::Finite(1.0));
        assert_eq!(right.good(), Some(true));
        assert_eq!(endpoint_good(&spec, Side::Left), Some(false));
        assert_eq!(
            classify_martingale(&spec, 1.0).unwrap().verdict,
            Verdict::Martingale
        );
    }

    #[test]
    fn gbm_inverse_endpoint_examples() {
        // left endpoint: s~(0) = -inf, no exit
        let spec = gbm_inverse(1.0, 1.0).unwrap();
        let left = analyze_endpoint(&spec, Side::Left);
        assert_eq!(left.s_tilde, EndpointValue::NegInfinity);
        assert_eq!(left.exit, Some(false));
        // gamma0 < 0: s~(inf) = inf, no exit at the right
        let neg = gbm_inverse(-1.0, 1.0).unwrap();
        let right = analyze_endpoint(&neg, Side::Right);
        assert_eq!(right.s_tilde, EndpointValue::PosInfinity);
        assert_eq!(right.exit, Some(false));
        // gamma0 > 0: good at infinity
        assert_eq!(endpoint_good(&spec, Side::Right), Some(true));
    }

    #[test]
    fn linear_integrand_is_strict_local() {
        let spec = gbm_spec(0.0, 1.0, |x| x).unwrap();
        let rep = classify_martingale(&spec, 1.0).unwrap();
        assert_eq!(rep.exit_r, Some(true));
        assert_eq!(rep.good_r, Some(false));
        assert_eq!(rep.verdict, Verdict::StrictLocal);
        assert_relative_eq!(
            match rep.st_r {
                EndpointValue::Finite(v) => v,
                other => panic!("{other:?}"),
            },
            0.5,
            max_relative = 1e-9
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(DiffusionSpec::new(|_| 0.0, |_| 0.0, |_| 0.0, 0.0, 1.0, 0.5).is_err());
        assert!(DiffusionSpec::new(|_| 0.0, |_| 1.0, |_| 0.0, 1.0, 0.0, 0.5).is_err());
        assert!(DiffusionSpec::new(|_| 0.0, |_| 1.0, |_| 0.0, 0.0, 1.0, 2.0).is_err());
        let spec = brownian(|_| 0.0);
        assert!(classify_martingale(&spec, 0.0).is_err());
    }

    #[test]
    fn report_serializes_infinite_limits_as_flags() {
        let rep = classify_martingale(&brownian(|_| 0.0), 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["s_r"], "+inf");
        assert_eq!(v["s_l"], "-inf");
        assert_eq!(v["verdict"], "martingale");
    }
}
