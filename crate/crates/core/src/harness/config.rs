//! Experiment configuration files.
//!
//! Configs are flat UTF-8 key/value text with dotted keys:
//!
//! ```text
//! experiment.n = 32
//! decode.tau = 0.9
//! warmstart.method = "token-injection"
//! warmstart.rho = 0.25
//! ```
//!
//! This is a subset of TOML, so section headers (`[decode]`) work as well.
//! Unknown keys are rejected. A `grid.*` block is read only by `sweep`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decoder::DecodeConfig;
use crate::denoiser::{NoisyOracleParams, OracleMode};
use crate::error::{Error, Result};
use crate::warmstart::{WarmStartConfig, WarmStartMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetRule {
    /// Uniform over `[0, V)^n`.
    Uniform,
    /// Sampled left to right from the bigram model fitted on the corpus.
    Markov,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub n: usize,
    pub vocab: usize,
    pub dim: usize,
    pub num_runs: usize,
    pub seed: u64,
    pub target: TargetRule,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { n: 32, vocab: 64, dim: 16, num_runs: 100, seed: 0, target: TargetRule::Uniform }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiserSpec {
    pub kind: String,
    pub c0: f64,
    pub gamma: f64,
    pub eta: f64,
    pub c_max: f64,
    pub mode: OracleMode,
    pub window: usize,
}

impl Default for DenoiserSpec {
    fn default() -> Self {
        let p = NoisyOracleParams::default();
        Self {
            kind: "noisy-oracle".into(),
            c0: p.c0,
            gamma: p.gamma,
            eta: p.eta,
            c_max: p.c_max,
            mode: p.mode,
            window: p.window,
        }
    }
}

impl DenoiserSpec {
    pub fn noisy_oracle_params(&self) -> NoisyOracleParams {
        NoisyOracleParams {
            c0: self.c0,
            gamma: self.gamma,
            eta: self.eta,
            c_max: self.c_max,
            mode: self.mode,
            window: self.window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProposerSpec {
    pub kind: String,
    pub epsilon: f64,
}

impl Default for ProposerSpec {
    fn default() -> Self {
        Self { kind: "corrupted-oracle".into(), epsilon: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeSpec {
    pub tau: f64,
    pub remask_enabled: bool,
    pub b0: f64,
    pub lambda: f64,
    /// Defaults to `2n`, which the one-remask-per-position policy never hits.
    pub k_max: Option<usize>,
}

impl Default for DecodeSpec {
    fn default() -> Self {
        Self { tau: 0.9, remask_enabled: false, b0: 0.5, lambda: 0.05, k_max: None }
    }
}

impl DecodeSpec {
    pub fn resolve(&self, n: usize) -> DecodeConfig {
        DecodeConfig {
            tau: self.tau,
            remask_enabled: self.remask_enabled,
            b0: self.b0,
            lambda: self.lambda,
            k_max: self.k_max.unwrap_or(2 * n),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    /// Relative paths resolve against the config file's directory.
    pub path: Option<PathBuf>,
}

/// Axes of a parameter sweep. An empty axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub method: Vec<WarmStartMethod>,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub tau: Vec<f64>,
    pub b0: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl GridSpec {
    pub fn is_empty(&self) -> bool {
        self.method.is_empty()
            && self.rho.is_empty()
            && self.alpha.is_empty()
            && self.epsilon.is_empty()
            && self.tau.is_empty()
            && self.b0.is_empty()
            && self.lambda.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub denoiser: DenoiserSpec,
    pub proposer: ProposerSpec,
    pub warmstart: WarmStartConfig,
    pub decode: DecodeSpec,
    pub corpus: CorpusSpec,
    #[serde(skip_serializing_if = "GridSpec::is_empty")]
    pub grid: GridSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses `path`; a relative corpus path is resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.n == 0 {
            return Err(Error::Config("experiment.n must be at least 1".into()));
        }
        if e.vocab < 2 {
            return Err(Error::Config("experiment.vocab must be at least 2".into()));
        }
        if e.dim == 0 {
            return Err(Error::Config("experiment.dim must be at least 1".into()));
        }
        if e.num_runs == 0 {
            return Err(Error::Config("experiment.num_runs must be at least 1".into()));
        }
        self.warmstart.validate()?;
        self.decode.resolve(e.n).validate()?;
        if self.denoiser.kind == "noisy-oracle" {
            self.denoiser.noisy_oracle_params().validate()?;
        }
        crate::error::check_unit("epsilon", self.proposer.epsilon)?;
        Ok(())
    }

    /// Same config with `decode.k_max` made explicit.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.decode.k_max = Some(self.decode.resolve(self.experiment.n).k_max);
        c
    }
}
