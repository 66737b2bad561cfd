//! Name-keyed registry of interchangeable strategies.
//!
//! Denoisers, proposers, and warm-start operators are each selected at
//! runtime from the experiment config by name. Built-ins are installed by
//! [`StrategyRegistry::with_builtins`]; callers can register more.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::domain::{DiffusionState, EmbeddingTable, Vocabulary};
use crate::denoiser::{BigramModel, Denoiser, MarkovDenoiser, NoisyOracle, UniformDenoiser};
use crate::error::{Error, Result};
use crate::harness::config::{DenoiserSpec, ProposerSpec};
use crate::proposal::{CorruptedOracleProposer, MarkovProposer, Proposal, Proposer};
use crate::rng::DeterministicRng;
use crate::warmstart::{WarmStart, WarmStartConfig, WarmStartMethod};

/// Shared artifacts a factory may need.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub bigram: Option<Arc<BigramModel>>,
}

impl Resources {
    fn bigram(&self, who: &str) -> Result<Arc<BigramModel>> {
        self.bigram
            .clone()
            .ok_or_else(|| Error::ModelNotFitted(format!("`{who}` needs a bigram model; set corpus.path")))
    }
}

pub type DenoiserFactory = fn(&DenoiserSpec, &Resources) -> Result<Box<dyn Denoiser>>;
pub type ProposerFactory = fn(&ProposerSpec, &Resources) -> Result<Box<dyn Proposer>>;

#[derive(Debug, Default)]
pub struct StrategyRegistry {
    denoisers: BTreeMap<String, DenoiserFactory>,
    proposers: BTreeMap<String, ProposerFactory>,
    warm_starts: BTreeMap<String, Box<dyn WarmStart>>,
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register_denoiser("noisy-oracle", |spec, _| Ok(Box::new(NoisyOracle::new(spec.noisy_oracle_params())?)));
        r.register_denoiser("markov", |_, res| Ok(Box::new(MarkovDenoiser::new(res.bigram("markov")?))));
        r.register_denoiser("uniform", |_, _| Ok(Box::new(UniformDenoiser)));

        r.register_proposer("corrupted-oracle", |spec, _| Ok(Box::new(CorruptedOracleProposer::new(spec.epsilon)?)));
        r.register_proposer("markov", |_, res| Ok(Box::new(MarkovProposer::new(res.bigram("markov")?))));

        for m in WarmStartMethod::ALL {
            r.warm_starts.insert(m.as_str().to_string(), Box::new(BuiltinWarmStart(m)));
        }
        r
    }

    pub fn register_denoiser(&mut self, name: &str, factory: DenoiserFactory) {
        self.denoisers.insert(name.to_string(), factory);
    }

    pub fn register_proposer(&mut self, name: &str, factory: ProposerFactory) {
        self.proposers.insert(name.to_string(), factory);
    }

    pub fn register_warm_start(&mut self, strategy: Box<dyn WarmStart>) {
        self.warm_starts.insert(strategy.name().to_string(), strategy);
    }

    pub fn denoiser_names(&self) -> Vec<&str> {
        self.denoisers.keys().map(String::as_str).collect()
    }

    pub fn proposer_names(&self) -> Vec<&str> {
        self.proposers.keys().map(String::as_str).collect()
    }

    pub fn warm_start_names(&self) -> Vec<&str> {
        self.warm_starts.keys().map(String::as_str).collect()
    }

    pub fn build_denoiser(&self, spec: &DenoiserSpec, res: &Resources) -> Result<Box<dyn Denoiser>> {
        let factory = self.denoisers.get(&spec.kind).ok_or_else(|| Error::UnknownStrategy {
            family: "denoiser",
            name: spec.kind.clone(),
            known: self.denoiser_names().join(", "),
        })?;
        factory(spec, res)
    }

    pub fn build_proposer(&self, spec: &ProposerSpec, res: &Resources) -> Result<Box<dyn Proposer>> {
        let factory = self.proposers.get(&spec.kind).ok_or_else(|| Error::UnknownStrategy {
            family: "proposer",
            name: spec.kind.clone(),
            known: self.proposer_names().join(", "),
        })?;
        factory(spec, res)
    }

    pub fn warm_start(&self, name: &str) -> Result<&dyn WarmStart> {
        self.warm_starts
            .get(name)
            .map(Box::as_ref)
            .ok_or_else(|| Error::UnknownStrategy {
                family: "warm-start",
                name: name.to_string(),
                known: self.warm_start_names().join(", "),
            })
    }
}

/// Adapter so the static built-ins can sit in the boxed map.
#[derive(Debug)]
struct BuiltinWarmStart(WarmStartMethod);

impl WarmStart for BuiltinWarmStart {
    fn name(&self) -> &'static str {
        self.0.as_str()
    }

    fn init(
        &self,
        vocab: Vocabulary,
        proposal: &Proposal,
        table: &EmbeddingTable,
        cfg: &WarmStartConfig,
        rng: &DeterministicRng,
    ) -> Result<DiffusionState> {
        self.0.strategy().init(vocab, proposal, table, cfg, rng)
    }
}
