use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use super::scenarios::{GeneratorConfig, CANONICAL_SEED};
use crate::step2::Step2Options;

/// Suite settings, read from TOML. Every key is optional.
///
/// ```toml
/// seed = 20240601
/// scenarios = "crates/core/data/golden_scenarios.tsv"
/// replications = 5
/// horizon = 3600.0
/// time_limit = 20.0
/// node_limit = 300
/// limit = 20
/// profile_scenarios = [1, 2, 3]
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Scenario generator seed; also salts simulation seeds.
    pub seed: u64,
    /// Scenario file; generated from `seed` when absent.
    pub scenarios: Option<PathBuf>,
    pub replications: u32,
    pub horizon: f64,
    pub step: f64,
    /// Step-2 solver time limit, s.
    pub time_limit: f64,
    pub node_limit: Option<u64>,
    pub jobs: Option<usize>,
    /// Run only the first `limit` scenarios.
    pub limit: Option<usize>,
    pub balance_threshold: f64,
    pub turn_threshold: f64,
    /// Scenarios whose delay profiles are written out.
    pub profile_scenarios: Vec<u32>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: CANONICAL_SEED,
            scenarios: None,
            replications: 5,
            horizon: 3600.0,
            step: 1.0,
            time_limit: 20.0,
            node_limit: Step2Options::default().node_limit,
            jobs: None,
            limit: None,
            balance_threshold: 0.10,
            turn_threshold: 0.10,
            profile_scenarios: (1..=10).collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Value(String),
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SuiteConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        // Relative scenario paths resolve against the config file.
        if let (Some(p), Some(dir)) = (&cfg.scenarios, path.parent()) {
            if p.is_relative() {
                cfg.scenarios = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Value(m.to_string()));
        if self.replications == 0 {
            return bad("replications must be positive");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if !(self.time_limit > 0.0) {
            return bad("time_limit must be positive");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive");
        }
        Ok(())
    }

    pub fn step2_options(&self) -> Step2Options {
        Step2Options {
            time_limit: Duration::from_secs_f64(self.time_limit),
            node_limit: self.node_limit,
            ..Step2Options::default()
        }
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seed,
            thresholds: crate::model::Thresholds {
                balance: self.balance_threshold,
                turn: self.turn_threshold,
            },
            ..GeneratorConfig::default()
        }
    }

    /// Simulation seed shared by both models for a given scenario and replication.
    pub fn sim_seed(&self, scenario: u32, replication: u32) -> u64 {
        self.seed
            .wrapping_mul(1_000_003)
            .wrapping_add(u64::from(scenario) * 100)
            .wrapping_add(u64::from(replication))
    }
}
