//! The reverse-model interface and its synthetic implementations.
//!
//! A [`Denoiser`] maps the current diffusion state to a full `n x V` logit
//! matrix. Rows are produced for every position, masked or fixed, because
//! remasking needs the model's belief about tokens that are already fixed.

use std::fmt;
use std::sync::Arc;

use crate::domain::{DiffusionState, EmbeddingTable, TokenId};
use crate::error::{Error, Result};

mod markov;
mod noisy_oracle;
mod scripted;

pub use markov::{BigramModel, MarkovDenoiser};
pub use noisy_oracle::{NoisyOracle, NoisyOracleParams, OracleMode};
pub use scripted::{ScriptedDenoiser, UniformDenoiser};

/// Smallest probability allowed before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Conditioning shared by every denoiser call in one decode.
#[derive(Debug, Clone)]
pub struct DenoiseContext {
    /// Planted ground truth; stands in for the prompt-determined answer.
    pub target: Vec<TokenId>,
    pub embeddings: Option<Arc<EmbeddingTable>>,
}

impl DenoiseContext {
    pub fn new(target: Vec<TokenId>, embeddings: Option<Arc<EmbeddingTable>>) -> Result<Self> {
        if let Some(table) = &embeddings {
            let vocab = table.vocab();
            if let Some(t) = target.iter().find(|t| !vocab.is_real(**t)) {
                return Err(Error::OutOfVocabulary { id: *t, size: vocab.size() });
            }
        }
        Ok(Self { target, embeddings })
    }
}

/// Dense row-major `n x V` matrix of finite logits.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl LogitMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let v = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * v);
        for row in rows {
            if row.len() != v {
                return Err(Error::shape(format!("row width {v}"), format!("row width {}", row.len())));
            }
            data.extend(row);
        }
        if let Some((index, value)) = data.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite { index, value: *value });
        }
        Ok(Self { rows: n, cols: v, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }
}

/// Reverse transition model. Implementations must be pure: identical inputs
/// give bit-identical outputs.
pub trait Denoiser: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn denoise(&self, state: &DiffusionState, ctx: &DenoiseContext) -> Result<LogitMatrix>;
}

pub(crate) fn check_lengths(state: &DiffusionState, ctx: &DenoiseContext) -> Result<()> {
    if state.len() != ctx.target.len() {
        return Err(Error::shape(
            format!("state length {}", ctx.target.len()),
            format!("state length {}", state.len()),
        ));
    }
    if let Some(t) = ctx.target.iter().find(|t| !state.vocab.is_real(**t)) {
        return Err(Error::OutOfVocabulary { id: *t, size: state.vocab.size() });
    }
    Ok(())
}

pub(crate) fn log_probs(probs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    probs.into_iter().map(|p| p.max(PROB_FLOOR).ln()).collect()
}
