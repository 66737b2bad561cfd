//! Synthetic reverse model whose confidence grows with revealed context.
//!
//! Each position gets a confidence `c_i` placed on an intended token `y_i`,
//! with the remaining mass spread uniformly. Faithful mode always intends the
//! target and only counts correct context; credulous mode counts any revealed
//! token as context and flips to a distractor when its local neighbourhood
//! mostly disagrees with the target.

use serde::{Deserialize, Serialize};

use super::{check_lengths, log_probs, DenoiseContext, Denoiser, LogitMatrix};
use crate::domain::{cosine, DiffusionState, TokenId};
use crate::error::{check_unit, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    Faithful,
    Credulous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyOracleParams {
    pub c0: f64,
    pub gamma: f64,
    pub eta: f64,
    pub c_max: f64,
    pub mode: OracleMode,
    pub window: usize,
}

impl Default for NoisyOracleParams {
    fn default() -> Self {
        Self {
            c0: 0.4,
            gamma: 0.6,
            eta: 0.3,
            c_max: 0.99,
            mode: OracleMode::Faithful,
            window: 3,
        }
    }
}

impl NoisyOracleParams {
    pub fn validate(&self) -> Result<()> {
        check_unit("c0", self.c0)?;
        check_unit("c_max", self.c_max)?;
        if self.c_max < self.c0 {
            return Err(Error::param("c_max", format!("{} is below c0 = {}", self.c_max, self.c0)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", "must be a finite value >= 0"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::param("eta", "must be a finite value >= 0"));
        }
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::param("window", format!("{} is not an odd positive integer", self.window)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NoisyOracle {
    params: NoisyOracleParams,
}

impl NoisyOracle {
    pub fn new(params: NoisyOracleParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &NoisyOracleParams {
        &self.params
    }

    fn context_fraction(&self, state: &DiffusionState, target: &[TokenId]) -> f64 {
        let n = state.len();
        let counted = (0..n)
            .filter(|&i| !state.is_masked(i))
            .filter(|&i| match self.params.mode {
                OracleMode::Faithful => state.tokens[i] == target[i],
                OracleMode::Credulous => true,
            })
            .count();
        counted as f64 / n as f64
    }

    /// Intended token at `pos`.
    pub fn intended_token(&self, state: &DiffusionState, target: &[TokenId], pos: usize) -> TokenId {
        let t = target[pos];
        if self.params.mode == OracleMode::Faithful {
            return t;
        }
        let half = self.params.window / 2;
        let lo = pos.saturating_sub(half);
        let hi = (pos + half).min(state.len() - 1);
        let (mut revealed, mut wrong) = (0usize, 0usize);
        for j in (lo..=hi).filter(|&j| j != pos && !state.is_masked(j)) {
            revealed += 1;
            if state.tokens[j] != target[j] {
                wrong += 1;
            }
        }
        if 2 * wrong > revealed {
            ((t as usize + 1) % state.vocab.size()) as TokenId
        } else {
            t
        }
    }

    /// Per-position confidence before the log transform.
    pub fn confidences(&self, state: &DiffusionState, ctx: &DenoiseContext) -> Result<Vec<f64>> {
        check_lengths(state, ctx)?;
        let p = &self.params;
        let base = (p.c0 + p.gamma * self.context_fraction(state, &ctx.target)).min(p.c_max);
        let mut out = vec![base; state.len()];

        if let Some(overrides) = &state.embedding_override {
            if overrides.len() != state.len() {
                return Err(Error::shape(
                    format!("{} override rows", state.len()),
                    format!("{} override rows", overrides.len()),
                ));
            }
            let table = ctx.embeddings.as_deref().ok_or_else(|| {
                Error::Precondition("embedding override present but no embedding table in context".into())
            })?;
            let e_mask = table.mask_embedding();
            for i in state.masked_positions() {
                let e_target = table.lookup(ctx.target[i])?;
                let s = cosine(&overrides[i], e_target) - cosine(e_mask, e_target);
                out[i] = (out[i] + p.eta * s).max(0.0).min(p.c_max);
            }
        }
        Ok(out)
    }
}

impl Denoiser for NoisyOracle {
    fn name(&self) -> &str {
        "noisy-oracle"
    }

    fn denoise(&self, state: &DiffusionState, ctx: &DenoiseContext) -> Result<LogitMatrix> {
        let v = state.vocab.size();
        let conf = self.confidences(state, ctx)?;
        let rows = conf
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let y = self.intended_token(state, &ctx.target, i) as usize;
                let rest = (1.0 - c) / (v - 1) as f64;
                log_probs((0..v).map(|tok| if tok == y { c } else { rest }))
            })
            .collect();
        LogitMatrix::from_rows(rows)
    }
}
