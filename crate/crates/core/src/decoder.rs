//! The inference loop: confidence-threshold parallel unmasking with a
//! forced-progress fallback, followed by optional stochastic remasking of
//! warm-injected tokens.
//!
//! Iterations are numbered from 1; iteration 0 is initialization. Each
//! iteration makes exactly one denoiser call, so NFE equals the number of
//! trace records. Remask decisions reuse the probabilities from that same
//! call.

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::denoiser::{DenoiseContext, Denoiser};
use crate::domain::{softmax, DiffusionState, TokenId};
use crate::error::{Error, Result};
use crate::rng::{purpose, DeterministicRng};
use crate::warmstart::{OverridePersistence, WarmStartConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub tau: f64,
    pub remask_enabled: bool,
    pub b0: f64,
    pub lambda: f64,
    pub k_max: usize,
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::param("tau", format!("{} is outside (0, 1]", self.tau)));
        }
        if !(self.b0 > 0.0 && self.b0.is_finite()) {
            return Err(Error::param("b0", format!("{} must be positive", self.b0)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("{} must be positive", self.lambda)));
        }
        if self.k_max == 0 {
            return Err(Error::param("k_max", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnmaskEvent {
    pub pos: usize,
    pub tok: TokenId,
    pub conf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemaskEvent {
    pub pos: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub unmasked: Vec<UnmaskEvent>,
    pub remasked: Vec<RemaskEvent>,
    pub masked_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    pub records: Vec<IterationRecord>,
    pub tokens: Vec<TokenId>,
    pub nfe: usize,
    /// The iteration cap was reached with masked positions left.
    pub capped: bool,
}

/// Per-position confidence: the max probability at masked positions and the
/// probability of the current token at fixed ones.
pub fn confidences(probs: &[Vec<f64>], state: &DiffusionState) -> Vec<f64> {
    probs
        .iter()
        .enumerate()
        .map(|(i, row)| {
            if state.is_masked(i) {
                row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            } else {
                row[state.tokens[i] as usize]
            }
        })
        .collect()
}

/// Lowest-index argmax.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in row.iter().enumerate().skip(1) {
        if *p > row[best] {
            best = i;
        }
    }
    best
}

/// All candidates with confidence strictly above `tau`; if there are none, the
/// single most confident candidate (lowest position on ties).
pub fn select_unmask(candidates: &[UnmaskEvent], tau: f64) -> Result<Vec<UnmaskEvent>> {
    if candidates.is_empty() {
        return Err(Error::Precondition("select_unmask needs at least one masked position".into()));
    }
    let above: Vec<UnmaskEvent> = candidates.iter().copied().filter(|c| c.conf > tau).collect();
    if !above.is_empty() {
        return Ok(above);
    }
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.conf > best.conf || (c.conf == best.conf && c.pos < best.pos) {
            best = *c;
        }
    }
    Ok(vec![best])
}

/// `clip((1 - c) + b0 - lambda * k, 0, 1)` for each confidence.
pub fn remask_rates(c_bar: &[f64], k: usize, b0: f64, lambda: f64) -> Vec<f64> {
    let bias = b0 - lambda * k as f64;
    c_bar.iter().map(|c| ((1.0 - c) + bias).clamp(0.0, 1.0)).collect()
}

/// Remasks each `(position, rate)` pair when `draw("remask", pos, k) < rate`.
/// Remasked positions leave the injected set for good.
pub fn apply_remask(
    state: &mut DiffusionState,
    rates: &[(usize, f64)],
    rng: &DeterministicRng,
    k: usize,
) -> Vec<RemaskEvent> {
    let mask = state.vocab.mask_id();
    let mut events = Vec::new();
    for &(pos, rate) in rates {
        if rng.bernoulli(purpose::REMASK, pos as u64, k as u64, rate) {
            state.tokens[pos] = mask;
            state.injected.remove(&pos);
            events.push(RemaskEvent { pos, rate });
        }
    }
    events
}

/// Runs the decode loop from `init` until nothing is masked or `k_max`
/// iterations have run.
pub fn decode(
    denoiser: &dyn Denoiser,
    ctx: &DenoiseContext,
    init: DiffusionState,
    dcfg: &DecodeConfig,
    wcfg: &WarmStartConfig,
    rng: &DeterministicRng,
) -> Result<(Vec<TokenId>, DecodeTrace)> {
    dcfg.validate()?;
    let n = init.len();
    if n != ctx.target.len() {
        return Err(Error::shape(format!("state length {}", ctx.target.len()), format!("state length {n}")));
    }
    if dcfg.k_max < n + init.injected.len() {
        warn!(
            k_max = dcfg.k_max,
            bound = n + init.injected.len(),
            "k_max is below n + |I|; the iteration cap may bind"
        );
    }

    let v = init.vocab.size();
    let mut state = init;
    let mut records = Vec::new();
    let mut k = 0;

    while state.masked_count() > 0 && k < dcfg.k_max {
        k += 1;
        state.iteration = k;

        let logits = denoiser.denoise(&state, ctx)?;
        if logits.rows() != n || logits.cols() != v {
            return Err(Error::shape(format!("{n}x{v} logits"), format!("{}x{} logits", logits.rows(), logits.cols())));
        }
        if k == 1 && wcfg.override_persistence == OverridePersistence::FirstIteration {
            state.embedding_override = None;
        }

        let probs = logits.iter_rows().map(softmax).collect::<Result<Vec<_>>>()?;
        let conf = confidences(&probs, &state);

        let candidates: Vec<UnmaskEvent> = state
            .masked_positions()
            .map(|pos| UnmaskEvent { pos, tok: argmax(&probs[pos]) as TokenId, conf: conf[pos] })
            .collect();
        let unmasked = select_unmask(&candidates, dcfg.tau)?;
        for ev in &unmasked {
            state.tokens[ev.pos] = ev.tok;
        }

        let remasked = if dcfg.remask_enabled && !state.injected.is_empty() {
            let eligible: Vec<usize> = state.injected.iter().copied().collect();
            let c_bar: Vec<f64> = eligible.iter().map(|&i| conf[i]).collect();
            let rates = remask_rates(&c_bar, k, dcfg.b0, dcfg.lambda);
            let pairs: Vec<(usize, f64)> = eligible.into_iter().zip(rates).collect();
            apply_remask(&mut state, &pairs, rng, k)
        } else {
            Vec::new()
        };

        records.push(IterationRecord { k, unmasked, remasked, masked_after: state.masked_count() });
    }

    let capped = state.masked_count() > 0;
    let trace = DecodeTrace { nfe: records.len(), records, tokens: state.tokens.clone(), capped };
    Ok((state.tokens, trace))
}
