//! Add-one smoothed bigram model and the bidirectional denoiser built on it.

use std::sync::Arc;

use super::{check_lengths, log_probs, DenoiseContext, Denoiser, LogitMatrix};
use crate::domain::{DiffusionState, TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Bigram counts with Laplace smoothing applied at query time.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramModel {
    vocab: Vocabulary,
    /// `counts[a * V + b]` = occurrences of `a` followed by `b`.
    counts: Vec<u64>,
    unigram: Vec<u64>,
    row_totals: Vec<u64>,
    col_totals: Vec<u64>,
    total_tokens: u64,
}

impl BigramModel {
    pub fn fit(vocab: Vocabulary, corpus: &[Vec<TokenId>]) -> Result<Self> {
        let v = vocab.size();
        let mut counts = vec![0u64; v * v];
        let mut unigram = vec![0u64; v];
        for seq in corpus {
            for &t in seq {
                if !vocab.is_real(t) {
                    return Err(Error::OutOfVocabulary { id: t, size: v });
                }
                unigram[t as usize] += 1;
            }
            for w in seq.windows(2) {
                counts[w[0] as usize * v + w[1] as usize] += 1;
            }
        }
        let total_tokens: u64 = unigram.iter().sum();
        if total_tokens == 0 {
            return Err(Error::ModelNotFitted("corpus contains no tokens".into()));
        }
        let row_totals = (0..v).map(|a| counts[a * v..(a + 1) * v].iter().sum()).collect();
        let col_totals = (0..v).map(|b| (0..v).map(|a| counts[a * v + b]).sum()).collect();
        Ok(Self { vocab, counts, unigram, row_totals, col_totals, total_tokens })
    }

    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    pub fn count(&self, prev: TokenId, next: TokenId) -> u64 {
        self.counts[prev as usize * self.vocab.size() + next as usize]
    }

    /// Smoothed `P(next | prev)`.
    pub fn forward(&self, prev: TokenId) -> Vec<f64> {
        let v = self.vocab.size();
        let a = prev as usize;
        let z = (self.row_totals[a] + v as u64) as f64;
        (0..v).map(|b| (self.counts[a * v + b] + 1) as f64 / z).collect()
    }

    /// Smoothed `P(prev | next)`.
    pub fn reverse(&self, next: TokenId) -> Vec<f64> {
        let v = self.vocab.size();
        let b = next as usize;
        let z = (self.col_totals[b] + v as u64) as f64;
        (0..v).map(|a| (self.counts[a * v + b] + 1) as f64 / z).collect()
    }

    pub fn unigram(&self) -> Vec<f64> {
        let v = self.vocab.size();
        let z = (self.total_tokens + v as u64) as f64;
        self.unigram.iter().map(|c| (c + 1) as f64 / z).collect()
    }
}

/// Mixes left-to-right and right-to-left bigram predictions from the nearest
/// revealed token on each side, falling back to the unigram when a side has
/// none.
#[derive(Debug, Clone)]
pub struct MarkovDenoiser {
    model: Arc<BigramModel>,
}

impl MarkovDenoiser {
    pub fn new(model: Arc<BigramModel>) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &BigramModel {
        &self.model
    }
}

impl Denoiser for MarkovDenoiser {
    fn name(&self) -> &str {
        "markov"
    }

    fn denoise(&self, state: &DiffusionState, ctx: &DenoiseContext) -> Result<LogitMatrix> {
        check_lengths(state, ctx)?;
        if state.vocab != self.model.vocab {
            return Err(Error::shape(
                format!("vocabulary size {}", self.model.vocab.size()),
                format!("vocabulary size {}", state.vocab.size()),
            ));
        }
        let n = state.len();
        let unigram = self.model.unigram();
        let rows = (0..n)
            .map(|i| {
                let left = (0..i).rev().find(|&j| !state.is_masked(j));
                let right = (i + 1..n).find(|&j| !state.is_masked(j));
                let l = left.map_or_else(|| unigram.clone(), |j| self.model.forward(state.tokens[j]));
                let r = right.map_or_else(|| unigram.clone(), |j| self.model.reverse(state.tokens[j]));
                log_probs(l.iter().zip(&r).map(|(a, b)| 0.5 * a + 0.5 * b))
            })
            .collect();
        LogitMatrix::from_rows(rows)
    }
}
