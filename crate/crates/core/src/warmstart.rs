//! Warm initialization: replaces the all-mask starting state with one that
//! carries the auxiliary proposal, either as discrete tokens or as blended
//! input embeddings.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{all_mask_init, DiffusionState, EmbeddingTable, Vocabulary};
use crate::error::{check_unit, Error, Result};
use crate::proposal::Proposal;
use crate::rng::{purpose, DeterministicRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarmStartMethod {
    None,
    TokenInjection,
    EmbeddingInterpolation,
}

impl WarmStartMethod {
    pub const ALL: [WarmStartMethod; 3] = [
        WarmStartMethod::None,
        WarmStartMethod::TokenInjection,
        WarmStartMethod::EmbeddingInterpolation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            WarmStartMethod::None => "none",
            WarmStartMethod::TokenInjection => "token-injection",
            WarmStartMethod::EmbeddingInterpolation => "embedding-interpolation",
        }
    }

    /// The built-in strategy object for this method.
    pub fn strategy(&self) -> &'static dyn WarmStart {
        match self {
            WarmStartMethod::None => &NoWarmStart,
            WarmStartMethod::TokenInjection => &TokenInjection,
            WarmStartMethod::EmbeddingInterpolation => &EmbeddingInterpolation,
        }
    }
}

impl fmt::Display for WarmStartMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WarmStartMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownStrategy {
                family: "warm-start",
                name: s.to_string(),
                known: Self::ALL.map(|m| m.as_str()).join(", "),
            })
    }
}

/// How long an embedding override stays visible to the denoiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverridePersistence {
    /// Only the first denoiser call sees the override.
    FirstIteration,
    /// Every call sees the override at positions that are still masked.
    #[default]
    WhileMasked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmStartConfig {
    pub method: WarmStartMethod,
    /// Injection rate for token injection; keep probability for embedding
    /// interpolation.
    pub rho: f64,
    /// Ignored unless the method is embedding interpolation.
    pub alpha: f64,
    pub override_persistence: OverridePersistence,
}

impl Default for WarmStartConfig {
    fn default() -> Self {
        Self {
            method: WarmStartMethod::None,
            rho: 0.25,
            alpha: 0.6,
            override_persistence: OverridePersistence::WhileMasked,
        }
    }
}

impl WarmStartConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit("rho", self.rho)?;
        check_unit("alpha", self.alpha)
    }
}

/// One way of building the initial diffusion state from a proposal.
pub trait WarmStart: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn init(
        &self,
        vocab: Vocabulary,
        proposal: &Proposal,
        table: &EmbeddingTable,
        cfg: &WarmStartConfig,
        rng: &DeterministicRng,
    ) -> Result<DiffusionState>;
}

#[derive(Debug, Clone, Copy)]
pub struct NoWarmStart;

#[derive(Debug, Clone, Copy)]
pub struct TokenInjection;

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingInterpolation;

impl WarmStart for NoWarmStart {
    fn name(&self) -> &'static str {
        WarmStartMethod::None.as_str()
    }

    fn init(
        &self,
        vocab: Vocabulary,
        proposal: &Proposal,
        _table: &EmbeddingTable,
        _cfg: &WarmStartConfig,
        _rng: &DeterministicRng,
    ) -> Result<DiffusionState> {
        all_mask_init(vocab, proposal.len())
    }
}

impl WarmStart for TokenInjection {
    fn name(&self) -> &'static str {
        WarmStartMethod::TokenInjection.as_str()
    }

    fn init(
        &self,
        vocab: Vocabulary,
        proposal: &Proposal,
        _table: &EmbeddingTable,
        cfg: &WarmStartConfig,
        rng: &DeterministicRng,
    ) -> Result<DiffusionState> {
        inject_tokens(vocab, proposal, cfg.rho, rng)
    }
}

impl WarmStart for EmbeddingInterpolation {
    fn name(&self) -> &'static str {
        WarmStartMethod::EmbeddingInterpolation.as_str()
    }

    fn init(
        &self,
        vocab: Vocabulary,
        proposal: &Proposal,
        table: &EmbeddingTable,
        cfg: &WarmStartConfig,
        rng: &DeterministicRng,
    ) -> Result<DiffusionState> {
        let mut state = all_mask_init(vocab, proposal.len())?;
        state.embedding_override = Some(interpolate_embeddings(proposal, table, cfg.alpha, cfg.rho, rng)?);
        Ok(state)
    }
}

/// Builds the initial state for `cfg.method`.
pub fn warm_init(
    vocab: Vocabulary,
    proposal: &Proposal,
    table: &EmbeddingTable,
    cfg: &WarmStartConfig,
    rng: &DeterministicRng,
) -> Result<DiffusionState> {
    warm_init_with(cfg.method.strategy(), vocab, proposal, table, cfg, rng)
}

/// Like [`warm_init`] but with an explicitly chosen strategy.
pub fn warm_init_with(
    strategy: &dyn WarmStart,
    vocab: Vocabulary,
    proposal: &Proposal,
    table: &EmbeddingTable,
    cfg: &WarmStartConfig,
    rng: &DeterministicRng,
) -> Result<DiffusionState> {
    cfg.validate()?;
    check_proposal(vocab, proposal)?;
    if table.vocab() != vocab {
        return Err(Error::shape(
            format!("embedding table over {} tokens", vocab.size()),
            format!("embedding table over {} tokens", table.vocab().size()),
        ));
    }
    strategy.init(vocab, proposal, table, cfg, rng)
}

fn check_proposal(vocab: Vocabulary, proposal: &Proposal) -> Result<()> {
    if proposal.is_empty() {
        return Err(Error::InvalidLength(0));
    }
    if let Some(t) = proposal.tokens.iter().find(|t| !vocab.is_real(**t)) {
        return Err(Error::OutOfVocabulary { id: *t, size: vocab.size() });
    }
    Ok(())
}

/// Token injection: position `i` takes the proposal token when its gate
/// `draw("inject-gate", i, 0) < rho` fires and stays masked otherwise.
pub fn inject_tokens(
    vocab: Vocabulary,
    proposal: &Proposal,
    rho: f64,
    rng: &DeterministicRng,
) -> Result<DiffusionState> {
    check_unit("rho", rho)?;
    check_proposal(vocab, proposal)?;
    let mut state = all_mask_init(vocab, proposal.len())?;
    let mut injected = BTreeSet::new();
    for (i, &tok) in proposal.tokens.iter().enumerate() {
        if rng.bernoulli(purpose::INJECT_GATE, i as u64, 0, rho) {
            state.tokens[i] = tok;
            injected.insert(i);
        }
    }
    state.injected = injected;
    Ok(state)
}

/// `(1 - alpha) * e_mask + alpha * Emb(proposal_i)`, kept with probability
/// `rho` and replaced by `e_mask` otherwise.
pub fn interpolate_embeddings(
    proposal: &Proposal,
    table: &EmbeddingTable,
    alpha: f64,
    rho: f64,
    rng: &DeterministicRng,
) -> Result<Vec<Vec<f64>>> {
    check_unit("alpha", alpha)?;
    check_unit("rho", rho)?;
    let e_mask = table.mask_embedding();
    proposal
        .tokens
        .iter()
        .enumerate()
        .map(|(i, &tok)| {
            let e_hat = table.lookup(tok)?;
            if !rng.bernoulli(purpose::EMBED_DROP, i as u64, 0, rho) {
                return Ok(e_mask.to_vec());
            }
            Ok(e_mask.iter().zip(e_hat).map(|(m, h)| (1.0 - alpha) * m + alpha * h).collect())
        })
        .collect()
}
