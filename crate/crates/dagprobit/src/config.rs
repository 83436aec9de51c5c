//! Run configuration: a TOML file of key/value pairs, overridable by flags.

use std::fs;
use std::path::{Path, PathBuf};

use dagprobit_core::mcmc::ChainConfig;
use dagprobit_core::{Dag, Hyperparameters};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Iterations of a quick run.
pub const QUICK_ITERATIONS: usize = 10_000;
/// Iterations of a long run (`--full`).
pub const FULL_ITERATIONS: usize = 120_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub iterations: usize,
    /// Defaults to a fifth of the iterations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub seed: u64,
    /// Centre and scale every covariate before fitting.
    pub standardize: bool,
    /// Level of the credible intervals reported for causal effects.
    pub level: f64,
    /// Defaults to `q + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Defaults to `1 / n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    /// Defaults to `min(3 / (2q − 2), 1/2)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    pub sigma0_sq: f64,
    /// Edge-list file of a DAG to hold fixed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_dag: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_edges: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            iterations: QUICK_ITERATIONS,
            burn_in: None,
            thin: 1,
            seed: 1,
            standardize: false,
            level: 0.95,
            a: None,
            g: None,
            pi: None,
            sigma0_sq: 0.25,
            fixed_dag: None,
            max_edges: None,
        }
    }
}

impl RunConfig {
    pub fn full() -> Self {
        RunConfig {
            iterations: FULL_ITERATIONS,
            ..RunConfig::default()
        }
    }

    /// Reads `path` on top of `base`; keys absent from the file keep their
    /// value in `base`.
    pub fn load(path: &Path, base: RunConfig) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, base).map_err(|m| CliError::input(path, m))
    }

    pub fn parse(text: &str, base: RunConfig) -> std::result::Result<Self, String> {
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| e.to_string())?;
        merged.extend(file);
        merged.try_into().map_err(|e: toml::de::Error| e.message().to_string())
    }

    pub fn hyperparameters(&self, q: usize, n: usize) -> Result<Hyperparameters> {
        let defaults = if n > 0 {
            Hyperparameters::defaults(q, n)?
        } else {
            Hyperparameters::defaults(q, 1)?
        };
        let hp = Hyperparameters {
            a: self.a.unwrap_or(defaults.a),
            g: self.g.unwrap_or(defaults.g),
            pi: self.pi.unwrap_or(defaults.pi),
            sigma0_sq: self.sigma0_sq,
        };
        hp.validate(q)?;
        Ok(hp)
    }

    pub fn chain_config(&self, q: usize, stream: u64) -> Result<ChainConfig> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::Usage(format!("level must lie in (0, 1), got {}", self.level)));
        }
        let mut cfg = ChainConfig::new(self.iterations, self.seed);
        cfg.burn_in = self.burn_in;
        cfg.thin = self.thin;
        cfg.stream = stream;
        cfg.max_edges = self.max_edges;
        if let Some(path) = &self.fixed_dag {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let dag = Dag::from_edge_list(q, &text).map_err(|e| CliError::input(path, e.to_string()))?;
            cfg.fixed_dag = Some(dag);
        }
        cfg.validate(q)?;
        Ok(cfg)
    }
}
