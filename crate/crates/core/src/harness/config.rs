use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::confidence::Mode;
use crate::error::{Error, Result};
use crate::popcore::RateModel;

/// One Monte Carlo experiment, read from TOML.
///
/// ```toml
/// name = "constant"
/// horizon = 1.0
/// replicates = 100
/// k_values = [100, 1000, 10000]
/// base_seed = 7
///
/// [model]
/// family = "constant"
/// h = 0.2
/// b = 0.4
///
/// [initial_ages]
/// law = "uniform"
/// lo = 0.0
/// hi = 1.0
///
/// [confidence]
/// alpha = [0.05]
/// modes = ["direct", "plugin"]
/// ci_strip_samples = 20
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub horizon: f64,
    pub replicates: usize,
    pub k_values: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_seed: Option<u64>,
    pub model: RateModel,
    pub initial_ages: InitialAgeLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<ConfidenceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialAgeLaw {
    /// `K` independent draws from `U[lo, hi)`; all ages equal `lo` when `lo = hi`.
    Uniform { lo: f64, hi: f64 },
    /// The listed ages, used verbatim for every `K`.
    Explicit { ages: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceConfig {
    #[serde(default = "default_alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    /// Cells per axis of region grids.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Replicates per `K` written to the interval strip output.
    #[serde(default)]
    pub ci_strip_samples: usize,
    /// Replicates per `K` for which 2-D regions are computed.
    #[serde(default)]
    pub region_samples: usize,
}

fn default_alpha() -> Vec<f64> {
    vec![0.05]
}

fn default_modes() -> Vec<Mode> {
    Mode::ALL.to_vec()
}

fn default_grid() -> usize {
    200
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            modes: default_modes(),
            grid: default_grid(),
            ci_strip_samples: 0,
            region_samples: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name {:?} must be a plain, nonempty file name", self.name));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        if self.replicates == 0 || self.replicates > 1 << 20 {
            return bad(format!("replicates {} must lie in 1..=2^20", self.replicates));
        }
        if self.k_values.is_empty() || self.k_values.contains(&0) {
            return bad("k_values must be nonempty and positive".into());
        }
        self.model.validate().map_err(|e| Error::Config(e.to_string()))?;
        match &self.initial_ages {
            InitialAgeLaw::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= *lo && lo <= hi) {
                    return bad(format!("uniform law needs 0 <= lo <= hi, got [{lo}, {hi}]"));
                }
            }
            InitialAgeLaw::Explicit { ages } => {
                if ages.is_empty() || ages.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                    return bad("explicit ages must be nonempty, finite and nonnegative".into());
                }
            }
        }
        if let Some(c) = &self.confidence {
            if c.alpha.is_empty() || c.alpha.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return bad("confidence.alpha values must lie in (0, 1)".into());
            }
            if c.modes.is_empty() {
                return bad("confidence.modes must not be empty".into());
            }
        }
        Ok(())
    }

    /// Truth in estimator output order.
    pub fn truth(&self) -> Vec<f64> {
        self.model.parameter_values()
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.model.parameter_names()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "demo"
horizon = 1.0
replicates = 3
k_values = [10, 20]

[model]
family = "population_linear"
lambda = 0.04
j2 = "[0,0.5) ∪ (1.5,2]"
eta = 0.08
j1 = "[0.5,1.5]"

[initial_ages]
law = "uniform"
lo = 0.0
hi = 1.0

[confidence]
modes = ["plugin"]
"#;

    #[test]
    fn parses_and_roundtrips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.base_seed, None);
        assert_eq!(cfg.parameter_names(), ["lambda", "eta"]);
        let c = cfg.confidence.as_ref().unwrap();
        assert_eq!(c.modes, [Mode::PlugIn]);
        assert_eq!(c.alpha, [0.05]);
        assert_eq!(c.grid, 200);
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        for (from, to) in [
            ("replicates = 3", "replicates = 0"),
            ("k_values = [10, 20]", "k_values = []"),
            ("horizon = 1.0", "horizon = -1.0"),
            ("lo = 0.0", "lo = 2.0"),
            ("lambda = 0.04", "lambda = -0.04"),
            ("name = \"demo\"", "name = \"a/b\""),
            ("modes = [\"plugin\"]", "modes = [\"exact\"]"),
            ("horizon = 1.0", "horizon = 1.0\nextra = 1"),
        ] {
            let text = SAMPLE.replace(from, to);
            assert!(
                matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))),
                "{to} accepted"
            );
        }
    }
}
