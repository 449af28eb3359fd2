//! Geometric Brownian motion: closed forms for the scale functions with
//! `f(x) = 1/x`, and the built-in diffusion families.

use serde::Serialize;

use super::feller::DiffusionSpec;
use super::special::{exp_integral_ei, incomplete_gamma_ext, rising_difference};
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GbmForms {
    pub rho: f64,
    pub rho_tilde: f64,
    pub s: f64,
    pub s_tilde: f64,
}

/// `gamma0 = 2 mu0 / sigma0^2 - 1`.
pub fn gbm_gamma0(mu0: f64, sigma0: f64) -> f64 {
    2.0 * mu0 / (sigma0 * sigma0) - 1.0
}

const GAMMA0_ZERO: f64 = 1e-12;

/// Closed forms at `x` for `dY = mu0 Y dt + sigma0 Y dB`, `f(x) = 1/x`,
/// reference point `c = 1`.
///
/// `s~(x) = -e^{-B} B^{-g} (G(-B/x) - G(-B))` with `B = 2/sigma0`, `g = gamma0`
/// and `G` the incomplete gamma extended to negative arguments; for
/// `g = 0` it becomes `e^{-B} (Ei(B) - Ei(B/x))`.
pub fn gbm_closed_forms(mu0: f64, sigma0: f64, x: f64) -> Result<GbmForms> {
    if !(sigma0 > 0.0) {
        return Err(param("sigma0", "must be > 0"));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(param("x", "must be a finite positive point"));
    }
    let g = gbm_gamma0(mu0, sigma0);
    let big_b = 2.0 / sigma0;
    let rho = x.powf(-(g + 1.0));
    let rho_tilde = rho * (big_b * (1.0 / x - 1.0)).exp();
    let s = if g.abs() < GAMMA0_ZERO {
        x.ln()
    } else {
        -(-g * x.ln()).exp_m1() / g
    };
    let s_tilde = if x == 1.0 {
        0.0
    } else if g.abs() < GAMMA0_ZERO {
        (-big_b).exp() * (exp_integral_ei(big_b)? - exp_integral_ei(big_b / x)?)
    } else {
        // below order 1/2 the two gamma values share a large Gamma(g) term
        let diff = if g >= 0.5 {
            incomplete_gamma_ext(g, -big_b / x)? - incomplete_gamma_ext(g, -big_b)?
        } else {
            rising_difference(g, big_b, big_b / x)?
        };
        -(-big_b).exp() * big_b.powf(-g) * diff
    };
    Ok(GbmForms {
        rho,
        rho_tilde,
        s,
        s_tilde,
    })
}

/// GBM on `(0, inf)` with `c = 1` and the given integrand.
pub fn gbm_spec(
    mu0: f64,
    sigma0: f64,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Result<DiffusionSpec> {
    if !(sigma0 > 0.0) || !mu0.is_finite() {
        return Err(param("sigma0", "need sigma0 > 0 and finite mu0"));
    }
    DiffusionSpec::new(
        move |x| mu0 * x,
        move |x| sigma0 * x,
        f,
        0.0,
        f64::INFINITY,
        1.0,
    )
}

/// GBM with `f(x) = 1/x`, the case behind the closed forms.
pub fn gbm_inverse(mu0: f64, sigma0: f64) -> Result<DiffusionSpec> {
    gbm_spec(mu0, sigma0, |x| 1.0 / x)
}

/// GBM with `f(x) = x`.
pub fn gbm_linear(mu0: f64, sigma0: f64) -> Result<DiffusionSpec> {
    gbm_spec(mu0, sigma0, |x| x)
}

/// Coefficients tabulated at increasing points, linearly interpolated
/// (and extrapolated from the outer cells).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub x: Vec<f64>,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub f: Vec<f64>,
}

impl CoefficientTable {
    /// Reads a CSV with columns `x, mu, sigma, f`.
    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut t = CoefficientTable {
            x: Vec::new(),
            mu: Vec::new(),
            sigma: Vec::new(),
            f: Vec::new(),
        };
        for rec in rdr.deserialize() {
            let (x, mu, sigma, f): (f64, f64, f64, f64) = rec?;
            t.x.push(x);
            t.mu.push(mu);
            t.sigma.push(sigma);
            t.f.push(f);
        }
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if n < 2 || self.mu.len() != n || self.sigma.len() != n || self.f.len() != n {
            return Err(param("table", "need at least two rows of x, mu, sigma, f"));
        }
        if self.x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(param("table", "x must be strictly increasing"));
        }
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0)
}

/// Diffusion on `(l, r)` built from a coefficient table; endpoints default
/// to the first and last tabulated points, `c` to their midpoint.
pub fn custom_table(
    table: CoefficientTable,
    l: Option<f64>,
    r: Option<f64>,
    c: Option<f64>,
) -> Result<DiffusionSpec> {
    table.validate()?;
    let l = l.unwrap_or(table.x[0]);
    let r = r.unwrap_or(*table.x.last().unwrap());
    let c = c.unwrap_or(0.5 * (l + r));
    let t = std::sync::Arc::new(table);
    let (t1, t2, t3) = (t.clone(), t.clone(), t);
    DiffusionSpec::new(
        move |x| interpolate(&t1.x, &t1.mu, x),
        move |x| interpolate(&t2.x, &t2.sigma, x),
        move |x| interpolate(&t3.x, &t3.f, x),
        l,
        r,
        c,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_gamma_case() {
        let g = gbm_closed_forms(1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(g.rho, 0.25, max_relative = 1e-15);
        assert_relative_eq!(g.s, 0.5, max_relative = 1e-15);
        assert_relative_eq!(g.rho_tilde, 0.25 * (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn closed_forms_vanish_at_reference() {
        for (mu, s) in [(1.0, 1.0), (0.5, 1.0), (-1.0, 2.0)] {
            let g = gbm_closed_forms(mu, s, 1.0).unwrap();
            assert_eq!((g.rho, g.rho_tilde, g.s, g.s_tilde), (1.0, 1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn table_interpolation() {
        let t = CoefficientTable {
            x: vec![0.0, 1.0, 3.0],
            mu: vec![0.0, 1.0, 0.0],
            sigma: vec![1.0, 1.0, 1.0],
            f: vec![0.0, 0.0, 0.0],
        };
        assert_eq!(interpolate(&t.x, &t.mu, 2.0), 0.5);
        assert_eq!(interpolate(&t.x, &t.mu, 4.0), -0.5);
        let spec = custom_table(t, None, None, None).unwrap();
        assert_eq!(spec.c, 1.5);
    }
}
