use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// How the resiliency process evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaMode {
    #[default]
    Constant,
    /// `dL = kappa (target - L) dt + c (L - low)(1 - L) dB4`.
    Diffusion,
}

/// How the bubble birth time is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauMode {
    #[default]
    Deterministic,
    /// First event of a Poisson process with rate `pi_intensity`.
    Intensity,
}

/// Every scalar of the model plus the numerical-scheme settings.
///
/// Field names are the config-file keys. Unknown keys are rejected when
/// deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Fundamental drift `a`.
    pub a: f64,
    /// Fundamental volatility `b`.
    pub b: f64,
    /// Bubble mean reversion `k`.
    pub k_decay: f64,
    /// Contagion rate.
    pub lambda_contagion: f64,
    /// Selling rate.
    pub delta_sell: f64,

    pub lambda0: f64,
    /// Lower bound of the resiliency process.
    pub lambda_low: f64,
    pub lambda_mode: LambdaMode,
    pub lambda_kappa: f64,
    pub lambda_target: f64,
    pub lambda_vol: f64,

    pub m0: f64,
    pub mu_m: f64,
    pub sigma_m: f64,

    pub theta0: f64,
    pub mu_theta: f64,
    pub sigma_theta: f64,

    /// Volume-volatility level; a non-empty `sigma_bar_schedule` overrides it.
    pub sigma_bar: f64,
    /// Piecewise-constant `[t_from, value]` pairs, sorted by time.
    pub sigma_bar_schedule: Vec<[f64; 2]>,
    /// Exponent of the volume volatility, must exceed 1/2.
    pub alpha_vol: f64,
    /// Volume unit the volatility kernel is evaluated in; `None` means one
    /// investor's share (`X / N`).
    pub vol_unit: Option<f64>,

    pub nodes: u64,
    /// Initial per-degree volume `X^k` at the bubble birth.
    pub xk0: f64,
    /// Aggregate volume at the birth; `None` means `nodes * xk0`.
    pub x_init: Option<f64>,

    pub pi_intensity: f64,
    pub pi_bound: f64,
    pub tau_mode: TauMode,
    pub tau0: f64,

    /// Liquidation horizon `T`.
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,

    pub burst_window: f64,
    pub burst_delta_mult: f64,
    pub burst_lambda_mult: f64,

    pub wf0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            a: 0.05,
            b: 0.2,
            k_decay: 0.1,
            lambda_contagion: 0.6,
            delta_sell: 0.4,
            lambda0: 0.5,
            lambda_low: 0.1,
            lambda_mode: LambdaMode::Constant,
            lambda_kappa: 1.0,
            lambda_target: 0.5,
            lambda_vol: 0.2,
            m0: 10.0,
            mu_m: 0.0,
            sigma_m: 0.5,
            theta0: 2.0,
            mu_theta: 0.2,
            sigma_theta: 0.4,
            sigma_bar: 0.5,
            sigma_bar_schedule: Vec::new(),
            alpha_vol: 1.0,
            vol_unit: None,
            nodes: 50_000,
            xk0: 0.02,
            x_init: None,
            pi_intensity: 0.0,
            pi_bound: 1.0,
            tau_mode: TauMode::Deterministic,
            tau0: 0.0,
            horizon: 3.0,
            dt: 1e-3,
            n_paths: 2000,
            seed: 20_160_901,
            burst_window: 0.2,
            burst_delta_mult: 20.0,
            burst_lambda_mult: 0.05,
            wf0: 1.0,
        }
    }
}

impl ModelParams {
    /// Checks every documented range; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        fn finite(key: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(param(key, "must be finite"))
            }
        }
        for (key, v) in [
            ("a", self.a),
            ("b", self.b),
            ("k_decay", self.k_decay),
            ("lambda_contagion", self.lambda_contagion),
            ("delta_sell", self.delta_sell),
            ("lambda0", self.lambda0),
            ("lambda_low", self.lambda_low),
            ("lambda_kappa", self.lambda_kappa),
            ("lambda_target", self.lambda_target),
            ("lambda_vol", self.lambda_vol),
            ("m0", self.m0),
            ("mu_m", self.mu_m),
            ("sigma_m", self.sigma_m),
            ("theta0", self.theta0),
            ("mu_theta", self.mu_theta),
            ("sigma_theta", self.sigma_theta),
            ("sigma_bar", self.sigma_bar),
            ("alpha_vol", self.alpha_vol),
            ("xk0", self.xk0),
            ("pi_intensity", self.pi_intensity),
            ("pi_bound", self.pi_bound),
            ("tau0", self.tau0),
            ("horizon", self.horizon),
            ("dt", self.dt),
            ("burst_window", self.burst_window),
            ("burst_delta_mult", self.burst_delta_mult),
            ("burst_lambda_mult", self.burst_lambda_mult),
            ("wf0", self.wf0),
        ] {
            finite(key, v)?;
        }
        let need = |ok: bool, key: &'static str, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(param(key, what.to_string()))
            }
        };
        need(self.a >= 0.0, "a", "must be >= 0")?;
        need(self.b >= 0.0, "b", "must be >= 0")?;
        need(self.k_decay >= 0.0, "k_decay", "must be >= 0")?;
        need(self.delta_sell >= 0.0, "delta_sell", "must be >= 0")?;
        need(
            self.lambda_contagion > self.delta_sell,
            "lambda_contagion",
            "must exceed delta_sell",
        )?;
        need(
            self.lambda_low > 0.0 && self.lambda_low < self.lambda0,
            "lambda_low",
            "must satisfy 0 < lambda_low < lambda0",
        )?;
        need(self.lambda0 < 1.0, "lambda0", "must be < 1")?;
        if self.lambda_mode == LambdaMode::Diffusion {
            need(
                self.lambda_target > self.lambda_low && self.lambda_target < 1.0,
                "lambda_target",
                "must lie in (lambda_low, 1)",
            )?;
            need(self.lambda_kappa > 0.0, "lambda_kappa", "must be > 0")?;
            need(self.lambda_vol >= 0.0, "lambda_vol", "must be >= 0")?;
        }
        need(self.m0 > 0.0, "m0", "must be > 0")?;
        need(self.sigma_m >= 0.0, "sigma_m", "must be >= 0")?;
        need(self.theta0 > 0.0, "theta0", "must be > 0")?;
        need(self.sigma_theta >= 0.0, "sigma_theta", "must be >= 0")?;
        need(self.sigma_bar >= 0.0, "sigma_bar", "must be >= 0")?;
        for w in self.sigma_bar_schedule.windows(2) {
            need(
                w[0][0] < w[1][0],
                "sigma_bar_schedule",
                "times must increase",
            )?;
        }
        need(
            self.sigma_bar_schedule
                .iter()
                .all(|e| e[0].is_finite() && e[1].is_finite() && e[1] >= 0.0),
            "sigma_bar_schedule",
            "entries must be finite with value >= 0",
        )?;
        need(self.alpha_vol > 0.5, "alpha_vol", "must exceed 1/2")?;
        if let Some(u) = self.vol_unit {
            need(u.is_finite() && u > 0.0, "vol_unit", "must be > 0")?;
        }
        need(self.nodes >= 1, "nodes", "must be >= 1")?;
        need(
            self.xk0 >= 0.0 && self.xk0 <= self.theta0,
            "xk0",
            "must lie in [0, theta0]",
        )?;
        if let Some(x) = self.x_init {
            need(x.is_finite() && x >= 0.0, "x_init", "must be >= 0")?;
        }
        need(self.pi_intensity >= 0.0, "pi_intensity", "must be >= 0")?;
        need(
            self.pi_bound >= self.pi_intensity,
            "pi_bound",
            "must bound pi_intensity",
        )?;
        need(self.horizon > 0.0, "horizon", "must be > 0")?;
        need(
            self.dt > 0.0 && self.dt < self.horizon,
            "dt",
            "must lie in (0, horizon)",
        )?;
        need(
            self.tau0 >= 0.0 && self.tau0 < self.horizon,
            "tau0",
            "must lie in [0, horizon)",
        )?;
        need(self.n_paths >= 1, "n_paths", "must be >= 1")?;
        need(self.burst_window > 0.0, "burst_window", "must be > 0")?;
        need(
            self.burst_delta_mult >= 0.0,
            "burst_delta_mult",
            "must be >= 0",
        )?;
        need(
            self.burst_lambda_mult >= 0.0,
            "burst_lambda_mult",
            "must be >= 0",
        )?;
        need(self.wf0 > 0.0, "wf0", "must be > 0")?;
        Ok(())
    }

    /// Aggregate volume at the bubble birth.
    pub fn x_birth(&self) -> f64 {
        self.x_init.unwrap_or(self.nodes as f64 * self.xk0)
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn vol_unit(&self) -> f64 {
        self.vol_unit.unwrap_or(self.nodes as f64)
    }

    pub fn sigma_bar_at(&self, t: f64) -> f64 {
        self.sigma_bar_schedule
            .iter()
            .rev()
            .find(|e| e[0] <= t)
            .map_or(self.sigma_bar, |e| e[1])
    }

    /// Same parameters with every volatility switched off, the fundamental
    /// and resiliency noise included.
    pub fn deterministic(&self) -> Self {
        Self {
            b: 0.0,
            lambda_vol: 0.0,
            sigma_bar: 0.0,
            sigma_bar_schedule: Vec::new(),
            sigma_m: 0.0,
            sigma_theta: 0.0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
        ModelParams::default().deterministic().validate().unwrap();
    }

    #[test]
    fn contagion_must_beat_selling() {
        let p = ModelParams {
            lambda_contagion: 0.3,
            ..Default::default()
        };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("lambda_contagion"), "{err}");
    }

    #[test]
    fn vol_exponent_lower_bound() {
        let p = ModelParams {
            alpha_vol: 0.5,
            ..Default::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("alpha_vol"));
    }

    #[test]
    fn schedule_lookup() {
        let p = ModelParams {
            sigma_bar_schedule: vec![[0.0, 0.3], [1.0, 0.7]],
            ..Default::default()
        };
        assert_eq!(p.sigma_bar_at(0.5), 0.3);
        assert_eq!(p.sigma_bar_at(1.0), 0.7);
        assert_eq!(ModelParams::default().sigma_bar_at(2.0), 0.5);
    }

    #[test]
    fn birth_volume_defaults_to_population_share() {
        assert_eq!(ModelParams::default().x_birth(), 1000.0);
    }
}
