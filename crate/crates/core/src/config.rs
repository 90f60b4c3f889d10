//! Run configuration: one TOML file holding every constant of a run. Missing
//! keys take their defaults, unknown keys are rejected, and several files
//! can be layered with later files overriding earlier ones key by key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::EnvConfig;
use crate::rl::DdpgConfig;
use crate::validation::Scenario;
use crate::vessel::VesselParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Provenance of reward parameters produced by the calibration tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationInfo {
    pub sample_count: usize,
    pub ground_speed_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub episodes: usize,
    /// Write a checkpoint every this many episodes; 0 writes only the final
    /// one.
    pub checkpoint_every: usize,
    /// Seeded runs per scenario in `eval`.
    pub eval_runs: usize,
    pub env: EnvConfig,
    pub vessel: VesselParams,
    pub ddpg: DdpgConfig,
    /// Scenarios for `eval`; empty means the built-in set.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationInfo>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("out"),
            episodes: 1000,
            checkpoint_every: 100,
            eval_runs: 1,
            env: EnvConfig::default(),
            vessel: VesselParams::default(),
            ddpg: DdpgConfig::default(),
            scenarios: Vec::new(),
            calibration: None,
        }
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_layers([(PathBuf::from("<string>"), text.to_string())])
    }

    /// Reads and layers `paths` in order. No paths gives the defaults.
    pub fn load(paths: &[PathBuf]) -> Result<Self, ConfigError> {
        let mut layers = Vec::with_capacity(paths.len());
        for path in paths {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            layers.push((path.clone(), text));
        }
        Self::from_layers(layers)
    }

    fn from_layers(
        layers: impl IntoIterator<Item = (PathBuf, String)>,
    ) -> Result<Self, ConfigError> {
        let mut table = toml::Table::new();
        let mut last = PathBuf::from("<defaults>");
        for (path, text) in layers {
            let layer: toml::Table =
                text.parse()
                    .map_err(|e: toml::de::Error| ConfigError::Parse {
                        path: path.clone(),
                        message: e.to_string(),
                    })?;
            merge(&mut table, layer);
            last = path;
        }
        let config: RunConfig =
            table
                .try_into()
                .map_err(|e: toml::de::Error| ConfigError::Parse {
                    path: last,
                    message: e.to_string(),
                })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.env.validate().map_err(ConfigError::Invalid)?;
        self.vessel.validate().map_err(ConfigError::Invalid)?;
        self.ddpg.validate().map_err(ConfigError::Invalid)?;
        if self.eval_runs == 0 {
            return Err(ConfigError::Invalid("eval_runs must be at least 1".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.scenarios {
            s.validate(&self.env)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if !names.insert(&s.name) {
                return Err(ConfigError::Invalid(format!(
                    "duplicate scenario name {}",
                    s.name
                )));
            }
        }
        Ok(())
    }

    /// The fully resolved configuration, every default spelled out.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration is representable as TOML")
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_toml_string()).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Scenarios to evaluate: the configured list, or the built-in set
    /// seeded from the run seed.
    pub fn eval_scenarios(&self) -> Vec<Scenario> {
        if !self.scenarios.is_empty() {
            return self.scenarios.clone();
        }
        Scenario::BUILTIN
            .iter()
            .filter_map(|name| Scenario::builtin(name, &self.env, self.seed))
            .collect()
    }

    /// A configured scenario by name, else a built-in one.
    pub fn scenario(&self, name: &str) -> Option<Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .cloned()
            .or_else(|| Scenario::builtin(name, &self.env, self.seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.env.mu_t, 5.41);
        assert_eq!(c.ddpg.gamma, 0.95);
        assert_eq!(c.vessel.max_power, 1e6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("sed = 3").is_err());
        assert!(RunConfig::from_toml_str("[env]\nmu = 3.0").is_err());
        assert!(RunConfig::from_toml_str("[ddpg]\ngamma = 0.9\nrho = 1").is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let mut c = RunConfig::default();
        c.seed = 77;
        c.env.mu_t = 5.0;
        c.scenarios = vec![Scenario::platoon(3, 2)];
        c.calibration = Some(CalibrationInfo {
            sample_count: 10,
            ground_speed_events: 1,
        });
        let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn layers_override_key_by_key() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.toml");
        let b = dir.path().join("b.toml");
        std::fs::write(&a, "seed = 5\n[env]\nbeta = 0.001\nmu_t = 4.0\n").unwrap();
        std::fs::write(&b, "[env]\nmu_t = 5.2\nsigma_t = 0.9\n").unwrap();
        let c = RunConfig::load(&[a, b]).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.env.beta, 0.001);
        assert_eq!(c.env.mu_t, 5.2);
        assert_eq!(c.env.sigma_t, 0.9);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(matches!(
            RunConfig::from_toml_str("[env]\nsigma_t = -1.0"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            RunConfig::from_toml_str("eval_runs = 0"),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn eval_scenarios_default_to_builtins() {
        let c = RunConfig::default();
        let names: Vec<String> = c.eval_scenarios().into_iter().map(|s| s.name).collect();
        assert_eq!(names, Scenario::BUILTIN);
        assert!(c.scenario("platoon").is_some());
        assert!(c.scenario("missing").is_none());
    }
}
