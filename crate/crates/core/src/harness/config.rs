//! Experiment configuration files (TOML).
//!
//! ```toml
//! version = 1
//! seeds = [1, 2, 3]
//! eval_episodes = 500
//! trace_episodes = 3
//! output_dir = "runs/sweep"
//! scalarization = "wpm"          # or "wsm"
//! networks = ["survivalist", "communitarian", "mutual"]
//!
//! [[custom_networks]]            # optional, referenced by name above
//! name = "mutual"
//! weights = [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
//!
//! [world]                        # any WorldConfig field, defaults otherwise
//! episode_length = 25
//!
//! [train]                        # any TrainConfig field except the seed
//! n_episodes = 30000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::WorldConfig;
use crate::graph::{Preset, RelationalNetwork};
use crate::scalarize::Scalarization;
use crate::trainer::TrainConfig;

pub const CONFIG_VERSION: u32 = 1;

/// Environment variable naming the root under which relative output
/// directories are created.
pub const OUTPUT_ROOT_VAR: &str = "RSRN_OUTPUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomNetwork {
    pub name: String,
    pub weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub world: WorldConfig,
    #[serde(default)]
    pub train: TrainConfig,
    pub networks: Vec<String>,
    #[serde(default)]
    pub custom_networks: Vec<CustomNetwork>,
    #[serde(default)]
    pub scalarization: Scalarization,
    pub seeds: Vec<u64>,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    #[serde(default = "default_trace_episodes")]
    pub trace_episodes: usize,
    pub output_dir: PathBuf,
}

fn default_eval_episodes() -> usize {
    500
}

fn default_trace_episodes() -> usize {
    3
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub episodes: Option<usize>,
    pub network: Option<String>,
    pub scalarization: Option<Scalarization>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(seeds) = &o.seeds {
            self.seeds = seeds.clone();
        }
        if let Some(n) = o.episodes {
            self.train.n_episodes = n;
        }
        if let Some(net) = &o.network {
            self.networks = vec![net.clone()];
        }
        if let Some(m) = o.scalarization {
            self.scalarization = m;
        }
        if let Some(out) = &o.output_dir {
            self.output_dir = out.clone();
        }
        self.validate()
    }

    /// Output directory, resolved against `root` when relative.
    pub fn resolved_output_dir(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.output_dir.is_relative() => r.join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn network(&self, name: &str) -> Result<RelationalNetwork, ConfigError> {
        if let Some(c) = self.custom_networks.iter().find(|c| c.name == name) {
            return RelationalNetwork::from_matrix(&c.weights)
                .map_err(|e| ConfigError::Invalid(format!("custom network `{name}`: {e}")));
        }
        let preset: Preset = name
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("network `{name}` is neither a preset nor a custom network")))?;
        RelationalNetwork::preset(preset, self.world.n_agents).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.version != CONFIG_VERSION {
            return invalid(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.seeds.is_empty() {
            return invalid("at least one seed is required".into());
        }
        if self.networks.is_empty() {
            return invalid("at least one network is required".into());
        }
        self.world.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.train.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for (k, c) in self.custom_networks.iter().enumerate() {
            if Preset::ALL.iter().any(|p| p.name() == c.name) {
                return invalid(format!("custom network `{}` shadows a preset", c.name));
            }
            if self.custom_networks[..k].iter().any(|o| o.name == c.name) {
                return invalid(format!("custom network `{}` defined twice", c.name));
            }
        }
        for (k, name) in self.networks.iter().enumerate() {
            if self.networks[..k].contains(name) {
                return invalid(format!("network `{name}` listed twice"));
            }
            let net = self.network(name)?;
            if net.n_agents() != self.world.n_agents {
                return invalid(format!(
                    "network `{name}` has {} agents but the world has {}",
                    net.n_agents(),
                    self.world.n_agents
                ));
            }
        }
        if self.output_dir.as_os_str().is_empty() {
            return invalid("output_dir must not be empty".into());
        }
        Ok(())
    }
}
