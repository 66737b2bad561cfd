//! Foundational types: vocabulary, diffusion state, embedding table, and the
//! numeric primitives shared by every decoding stage.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{purpose, DeterministicRng};

pub type TokenId = u32;

/// Real tokens are `0..size`; the mask sentinel is `size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    size: usize,
}

impl Vocabulary {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidVocabulary(size));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mask_id(&self) -> TokenId {
        self.size as TokenId
    }

    pub fn is_real(&self, id: TokenId) -> bool {
        (id as usize) < self.size
    }
}

/// The evolving, partially masked output sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionState {
    pub vocab: Vocabulary,
    pub tokens: Vec<TokenId>,
    /// Positions still holding a warm-injected token that was never remasked.
    pub injected: BTreeSet<usize>,
    /// Per-position input vectors used in place of the mask embedding.
    pub embedding_override: Option<Vec<Vec<f64>>>,
    pub iteration: usize,
}

impl DiffusionState {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn is_masked(&self, pos: usize) -> bool {
        self.tokens[pos] == self.vocab.mask_id()
    }

    pub fn masked_count(&self) -> usize {
        let mask = self.vocab.mask_id();
        self.tokens.iter().filter(|t| **t == mask).count()
    }

    pub fn masked_positions(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.vocab.mask_id();
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| **t == mask)
            .map(|(i, _)| i)
    }
}

/// The all-mask starting state.
pub fn all_mask_init(vocab: Vocabulary, n: usize) -> Result<DiffusionState> {
    if n == 0 {
        return Err(Error::InvalidLength(n));
    }
    Ok(DiffusionState {
        vocab,
        tokens: vec![vocab.mask_id(); n],
        injected: BTreeSet::new(),
        embedding_override: None,
        iteration: 0,
    })
}

/// `(V + 1) x d` table; row `V` is the mask embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vocabulary,
    dim: usize,
    rows: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(vocab: Vocabulary, dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "embedding dimension must be positive"));
        }
        if rows.len() != vocab.size() + 1 {
            return Err(Error::shape(
                format!("{} rows", vocab.size() + 1),
                format!("{} rows", rows.len()),
            ));
        }
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::shape(format!("row width {dim}"), format!("row width {}", row.len())));
            }
            flat.extend(row);
        }
        if let Some((index, value)) = flat.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value: *value });
        }
        Ok(Self { vocab, dim, rows: flat })
    }

    /// Entries drawn uniformly from `[-1, 1)`, addressed by (token, column).
    pub fn random(vocab: Vocabulary, dim: usize, rng: &DeterministicRng) -> Result<Self> {
        let rows = (0..=vocab.size())
            .map(|t| {
                (0..dim)
                    .map(|c| 2.0 * rng.draw(purpose::EMBEDDING_TABLE, t as u64, c as u64) - 1.0)
                    .collect()
            })
            .collect();
        Self::new(vocab, dim, rows)
    }

    pub fn vocab(&self) -> Vocabulary {
        self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lookup(&self, id: TokenId) -> Result<&[f64]> {
        let row = id as usize;
        if row > self.vocab.size() {
            return Err(Error::OutOfVocabulary { id, size: self.vocab.size() });
        }
        Ok(&self.rows[row * self.dim..(row + 1) * self.dim])
    }

    pub fn mask_embedding(&self) -> &[f64] {
        let v = self.vocab.size();
        &self.rows[v * self.dim..(v + 1) * self.dim]
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if let Some((index, value)) = logits.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value: *value });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= z);
    Ok(out)
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}
