//! Scenario configuration: one JSON document per scenario.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use impulsive_logistic::analysis::{ANALYTIC_TOL, ORACLE_TOL, PERIODICITY_TOL};
use impulsive_logistic::{CoefficientPair, ModelParams, PeriodicCoefficient, StepControl};
use serde::{Deserialize, Serialize};

pub const DEFAULT_T0: f64 = 0.5;
pub const DEFAULT_HORIZON: u64 = 10;
pub const DEFAULT_STEP: f64 = 1.0 / 256.0;

fn default_t0() -> f64 {
    DEFAULT_T0
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// analytic formula against analytic formula (jump checks)
    #[serde(default = "Tolerances::default_analytic")]
    pub analytic: f64,
    /// analytic formula against the RK4 trajectory
    #[serde(default = "Tolerances::default_oracle")]
    pub oracle: f64,
    #[serde(default = "Tolerances::default_periodicity")]
    pub periodicity: f64,
}

impl Tolerances {
    fn default_analytic() -> f64 {
        ANALYTIC_TOL
    }
    fn default_oracle() -> f64 {
        ORACLE_TOL
    }
    fn default_periodicity() -> f64 {
        PERIODICITY_TOL
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            analytic: ANALYTIC_TOL,
            oracle: ORACLE_TOL,
            periodicity: PERIODICITY_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub r: PeriodicCoefficient,
    #[serde(rename = "K")]
    pub k: PeriodicCoefficient,
    #[serde(rename = "E")]
    pub harvest: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon_periods: u64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|err| {
            let path = err.path().to_string();
            let inner = err.into_inner();
            if path.is_empty() || path == "." {
                anyhow!("{inner}")
            } else {
                anyhow!("field `{path}`: {inner}")
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every field, naming the offending one on failure.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.r.validate().map_err(|e| anyhow!("field `r`: {e}"))?;
        self.k.validate().map_err(|e| anyhow!("field `K`: {e}"))?;
        if !(self.harvest.is_finite() && (0.0..1.0).contains(&self.harvest)) {
            return Err(anyhow!("field `E`: must lie in [0, 1), got {}", self.harvest));
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(anyhow!("field `t0`: must be positive, got {}", self.t0));
        }
        if let Some(x0) = self.x0 {
            if !(x0.is_finite() && x0 > 0.0) {
                return Err(anyhow!("field `x0`: must be positive, got {x0}"));
            }
        }
        if self.horizon_periods == 0 {
            return Err(anyhow!("field `horizon_periods`: must be at least 1"));
        }
        StepControl::fixed(self.step)
            .steps_per_unit()
            .map_err(|e| anyhow!("field `step`: {e}"))?;
        let tol = &self.tolerances;
        for (name, v) in [
            ("analytic", tol.analytic),
            ("oracle", tol.oracle),
            ("periodicity", tol.periodicity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(anyhow!("field `tolerances.{name}`: must be positive, got {v}"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> anyhow::Result<ModelParams> {
        let pair = CoefficientPair::new(self.r.clone(), self.k.clone())?;
        Ok(ModelParams::new(pair, self.harvest, self.t0)?)
    }

    pub fn step_control(&self) -> StepControl {
        StepControl::fixed(self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
        "r": {"kind": "constant", "value": 0.6931471805599453},
        "K": {"kind": "constant", "value": 100},
        "E": 0.25
    }"#;

    #[test]
    fn defaults_apply() {
        let cfg = ScenarioConfig::from_json(GOLDEN).unwrap();
        assert_eq!(cfg.t0, 0.5);
        assert_eq!(cfg.horizon_periods, 10);
        assert_eq!(cfg.step, 1.0 / 256.0);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.x0, None);
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::from_json(GOLDEN).unwrap();
        let again = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn errors_name_the_field() {
        let bad_kind = GOLDEN.replace("\"constant\", \"value\": 100", "\"cubic\", \"value\": 100");
        let msg = format!("{:#}", ScenarioConfig::from_json(&bad_kind).unwrap_err());
        assert!(msg.contains("`K.kind`") && msg.contains("line 3"), "{msg}");

        let bad_e = GOLDEN.replace("0.25", "1.5");
        let msg = format!("{:#}", ScenarioConfig::from_json(&bad_e).unwrap_err());
        assert!(msg.contains("`E`"), "{msg}");

        let bad_amp = r#"{"r": {"kind": "sinusoid", "mean": 0.1, "amp": 0.2},
            "K": {"kind": "constant", "value": 1}, "E": 0.1}"#;
        let msg = format!("{:#}", ScenarioConfig::from_json(bad_amp).unwrap_err());
        assert!(msg.contains("`r`"), "{msg}");

        let bad_type = GOLDEN.replace("0.25", "\"lots\"");
        let msg = format!("{:#}", ScenarioConfig::from_json(&bad_type).unwrap_err());
        assert!(msg.contains("`E`") && msg.contains("line"), "{msg}");

        let bad_step = GOLDEN.replace("\"E\": 0.25", "\"E\": 0.25, \"step\": 0.3");
        let msg = format!("{:#}", ScenarioConfig::from_json(&bad_step).unwrap_err());
        assert!(msg.contains("`step`"), "{msg}");

        let unknown = GOLDEN.replace("\"E\": 0.25", "\"E\": 0.25, \"harvest\": 0.1");
        assert!(ScenarioConfig::from_json(&unknown).is_err());
    }
}
