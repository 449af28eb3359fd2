//! Run configuration: one flat JSON object holding the model parameters
//! and the command options.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::network::NetworkSpec;
use crate::params::ModelParams;

/// Built-in diffusion families of the martingale lab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FellerFamily {
    GbmInverse,
    GbmLinear,
    CustomTable,
}

impl FellerFamily {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
            Error::Config(format!(
                "feller_family: unknown family `{s}` (gbm-inverse, gbm-linear, custom-table)"
            ))
        })
    }
}

/// Options that are not model parameters. Field names are config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Network label, `sf2.2`, `sf2.5`, `er3.2` or `er1.9` style.
    pub network: String,
    pub t_probe: f64,
    pub out: PathBuf,
    /// Trajectories written in full by `simulate`.
    pub keep: usize,
    /// Evaluation time of the measure flow.
    pub flow_t: f64,
    pub feller_family: FellerFamily,
    pub feller_mu0: f64,
    pub feller_sigma0: f64,
    /// Coefficient CSV for the `custom-table` family.
    pub feller_table: Option<PathBuf>,
    pub feller_horizon: f64,
    /// Paths of the Monte Carlo check of the verdict; zero skips it.
    pub feller_mc_paths: usize,
    /// Step ladder of the convergence study, coarsest first.
    pub convergence_dts: Vec<f64>,
    pub convergence_paths: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            network: NetworkSpec::SF22.label(),
            t_probe: 0.6,
            out: PathBuf::from("out"),
            keep: 5,
            flow_t: 0.0,
            feller_family: FellerFamily::GbmInverse,
            feller_mu0: 1.0,
            feller_sigma0: 1.0,
            feller_table: None,
            feller_horizon: 1.0,
            feller_mc_paths: 0,
            convergence_dts: vec![4e-3, 2e-3, 1e-3, 5e-4],
            convergence_paths: 100,
        }
    }
}

const RUN_KEYS: [&str; 13] = [
    "network",
    "t_probe",
    "out",
    "keep",
    "flow_t",
    "feller_family",
    "feller_mu0",
    "feller_sigma0",
    "feller_table",
    "feller_horizon",
    "feller_mc_paths",
    "convergence_dts",
    "convergence_paths",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub options: RunOptions,
}

fn schema(e: serde_json::Error) -> Error {
    Error::Config(e.to_string())
}

impl RunConfig {
    /// Parses a flat JSON object; missing keys take their defaults and
    /// unknown keys are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let text = text.trim();
        let value: Value = if text.is_empty() {
            Value::Object(Map::new())
        } else {
            serde_json::from_str(text).map_err(schema)?
        };
        let Value::Object(mut all) = value else {
            return Err(Error::Config("the config must be a JSON object".into()));
        };
        let mut run = Map::new();
        for key in RUN_KEYS {
            if let Some(v) = all.remove(key) {
                run.insert(key.to_string(), v);
            }
        }
        let model: ModelParams = serde_json::from_value(Value::Object(all)).map_err(schema)?;
        let options: RunOptions = serde_json::from_value(Value::Object(run)).map_err(schema)?;
        let cfg = Self { model, options };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Re-checks every invariant; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.network()?;
        let o = &self.options;
        let bad = |key: &str, what: &str| Err(Error::Config(format!("{key}: {what}")));
        if !(o.t_probe >= 0.0 && o.t_probe <= self.model.horizon) {
            return bad("t_probe", "must lie in [0, horizon]");
        }
        if !(o.flow_t >= 0.0 && o.flow_t < self.model.horizon) {
            return bad("flow_t", "must lie in [0, horizon)");
        }
        if !(o.feller_sigma0 > 0.0) || !o.feller_mu0.is_finite() {
            return bad("feller_sigma0", "need sigma0 > 0 and finite mu0");
        }
        if !(o.feller_horizon > 0.0) {
            return bad("feller_horizon", "must be > 0");
        }
        if o.feller_family == FellerFamily::CustomTable && o.feller_table.is_none() {
            return bad("feller_table", "required by the custom-table family");
        }
        if o.convergence_dts.len() < 3 || o.convergence_dts.iter().any(|d| !(*d > 0.0)) {
            return bad("convergence_dts", "need at least three positive steps");
        }
        if o.convergence_paths == 0 {
            return bad("convergence_paths", "must be > 0");
        }
        Ok(())
    }

    pub fn network(&self) -> Result<NetworkSpec> {
        NetworkSpec::parse(&self.options.network)
    }

    /// The flat JSON object that [`RunConfig::from_json`] reads back to an
    /// identical config.
    pub fn to_json(&self) -> Result<String> {
        let Value::Object(mut all) = serde_json::to_value(&self.model)? else {
            unreachable!("params serialize to an object");
        };
        let Value::Object(run) = serde_json::to_value(&self.options)? else {
            unreachable!("options serialize to an object");
        };
        all.extend(run);
        Ok(serde_json::to_string_pretty(&Value::Object(all))? + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_the_default_set() {
        let cfg = RunConfig::from_json("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(RunConfig::from_json("{}").unwrap(), cfg);
        let m = &cfg.model;
        assert_eq!(
            (
                m.delta_sell,
                m.lambda_contagion,
                m.lambda0,
                m.k_decay,
                m.sigma_bar
            ),
            (0.4, 0.6, 0.5, 0.1, 0.5)
        );
        assert_eq!(
            (m.tau0, m.horizon, m.m0, m.mu_m, m.sigma_m),
            (0.0, 3.0, 10.0, 0.0, 0.5)
        );
        assert_eq!(
            (m.theta0, m.mu_theta, m.sigma_theta, m.xk0),
            (2.0, 0.2, 0.4, 0.02)
        );
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_json(r#"{"lamda": 1}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("lamda"), "{err}");
    }

    #[test]
    fn contagion_gate() {
        let err = RunConfig::from_json(r#"{"lambda_contagion": 0.3}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("lambda_contagion"), "{err}");
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.model.dt = 1e-4;
        cfg.model.vol_unit = Some(1.0);
        cfg.options.network = "er1.9".into();
        cfg.options.feller_table = Some("coeffs.csv".into());
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_options_are_rejected() {
        assert!(RunConfig::from_json(r#"{"network": "ba3"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"t_probe": 7}"#).is_err());
        assert!(RunConfig::from_json(r#"{"feller_family": "custom-table"}"#).is_err());
        assert!(RunConfig::from_json("[1, 2]").is_err());
        assert!(FellerFamily::parse("gbm-linear").is_ok());
        assert!(FellerFamily::parse("gbm").is_err());
    }
}
