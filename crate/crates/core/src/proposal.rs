//! Auxiliary warm-proposal generators.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::denoiser::BigramModel;
use crate::domain::{TokenId, Vocabulary};
use crate::error::{check_unit, Error, Result};
use crate::rng::{purpose, DeterministicRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalSource {
    CorruptedOracle,
    Markov,
}

/// A full-length warm token sequence. Never contains the mask id.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub tokens: Vec<TokenId>,
    pub source: ProposalSource,
    pub epsilon: Option<f64>,
}

impl Proposal {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Copies the target, replacing each position with probability `epsilon` by
/// a uniformly chosen different token.
///
/// The corruption gate is `draw < epsilon` on a per-position uniform, so for a
/// fixed seed the corrupted set grows monotonically with `epsilon`.
pub fn propose_corrupted(
    vocab: Vocabulary,
    target: &[TokenId],
    epsilon: f64,
    rng: &DeterministicRng,
) -> Result<Proposal> {
    check_unit("epsilon", epsilon)?;
    let v = vocab.size();
    let tokens = target
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            if !vocab.is_real(t) {
                return Err(Error::OutOfVocabulary { id: t, size: v });
            }
            if !rng.bernoulli(purpose::PROPOSAL_CORRUPT, i as u64, 0, epsilon) {
                return Ok(t);
            }
            let alt = rng.index(purpose::PROPOSAL_SUBSTITUTE, i as u64, 0, v - 1) as TokenId;
            Ok(if alt >= t { alt + 1 } else { alt })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Proposal { tokens, source: ProposalSource::CorruptedOracle, epsilon: Some(epsilon) })
}

/// Left-to-right sample from a bigram model.
pub fn propose_markov(model: &BigramModel, n: usize, rng: &DeterministicRng) -> Result<Proposal> {
    if n == 0 {
        return Err(Error::InvalidLength(n));
    }
    let mut tokens = Vec::with_capacity(n);
    let first = rng.categorical(purpose::PROPOSAL_MARKOV, 0, 0, &model.unigram()) as TokenId;
    tokens.push(first);
    for i in 1..n {
        let prev = tokens[i - 1];
        tokens.push(rng.categorical(purpose::PROPOSAL_MARKOV, i as u64, 0, &model.forward(prev)) as TokenId);
    }
    Ok(Proposal { tokens, source: ProposalSource::Markov, epsilon: None })
}

/// A warm-proposal strategy selectable by name.
pub trait Proposer: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn propose(&self, vocab: Vocabulary, target: &[TokenId], rng: &DeterministicRng) -> Result<Proposal>;
}

#[derive(Debug, Clone, Copy)]
pub struct CorruptedOracleProposer {
    pub epsilon: f64,
}

impl CorruptedOracleProposer {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_unit("epsilon", epsilon)?;
        Ok(Self { epsilon })
    }
}

impl Proposer for CorruptedOracleProposer {
    fn name(&self) -> &str {
        "corrupted-oracle"
    }

    fn propose(&self, vocab: Vocabulary, target: &[TokenId], rng: &DeterministicRng) -> Result<Proposal> {
        propose_corrupted(vocab, target, self.epsilon, rng)
    }
}

/// Ignores the target apart from its length.
#[derive(Debug, Clone)]
pub struct MarkovProposer {
    model: Arc<BigramModel>,
}

impl MarkovProposer {
    pub fn new(model: Arc<BigramModel>) -> Self {
        Self { model }
    }
}

impl Proposer for MarkovProposer {
    fn name(&self) -> &str {
        "markov"
    }

    fn propose(&self, vocab: Vocabulary, target: &[TokenId], rng: &DeterministicRng) -> Result<Proposal> {
        if vocab != self.model.vocab() {
            return Err(Error::shape(
                format!("vocabulary size {}", self.model.vocab().size()),
                format!("vocabulary size {}", vocab.size()),
            ));
        }
        propose_markov(&self.model, target.len(), rng)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn vocab(v: usize) -> Vocabulary {
        Vocabulary::new(v).unwrap()
    }

    #[test]
    fn epsilon_zero_is_identity() {
        let target = vec![3, 1, 4, 1, 5, 0, 2];
        let p = propose_corrupted(vocab(6), &target, 0.0, &DeterministicRng::new(9)).unwrap();
        assert_eq!(p.tokens, target);
        assert_eq!(p.epsilon, Some(0.0));
    }

    #[test]
    fn epsilon_one_binary_flips_everything() {
        let target = vec![0, 1, 1, 0, 1];
        let p = propose_corrupted(vocab(2), &target, 1.0, &DeterministicRng::new(1)).unwrap();
        assert_eq!(p.tokens, vec![1, 0, 0, 1, 0]);
    }

    #[test]
    fn half_corruption_concentrates() {
        let n = 10_000;
        let target: Vec<TokenId> = (0..n).map(|i| (i % 7) as TokenId).collect();
        let p = propose_corrupted(vocab(7), &target, 0.5, &DeterministicRng::new(2024)).unwrap();
        let dist = p.tokens.iter().zip(&target).filter(|(a, b)| a != b).count() as f64 / n as f64;
        assert!((0.47..=0.53).contains(&dist), "{dist}");
    }

    #[test]
    fn epsilon_range_checked() {
        assert!(propose_corrupted(vocab(3), &[0], 1.5, &DeterministicRng::new(0)).is_err());
        assert!(propose_corrupted(vocab(3), &[0], -0.1, &DeterministicRng::new(0)).is_err());
    }

    #[test]
    fn markov_reproduces_deterministic_chain() {
        // 0 -> 1 -> 2 -> 3 -> 0 with counts large enough that the smoothed
        // rows are one-hot to within 4e-6.
        let cycle: Vec<TokenId> = (0..4 * 250_000).map(|i| (i % 4) as TokenId).collect();
        let model = BigramModel::fit(vocab(4), &[cycle]).unwrap();
        let p = propose_markov(&model, 12, &DeterministicRng::new(17)).unwrap();
        for w in p.tokens.windows(2) {
            assert_eq!(w[1], (w[0] + 1) % 4);
        }
        assert_eq!(p.source, ProposalSource::Markov);
    }

    #[test]
    fn markov_single_token_and_determinism() {
        let model = BigramModel::fit(vocab(5), &[vec![0, 1, 2, 3, 4, 0, 2]]).unwrap();
        let a = propose_markov(&model, 1, &DeterministicRng::new(3)).unwrap();
        assert_eq!(a.len(), 1);
        let b = propose_markov(&model, 20, &DeterministicRng::new(3)).unwrap();
        let c = propose_markov(&model, 20, &DeterministicRng::new(3)).unwrap();
        assert_eq!(b, c);
        assert!(b.tokens.iter().all(|t| (*t as usize) < 5));
        assert!(propose_markov(&model, 0, &DeterministicRng::new(3)).is_err());
    }

    proptest! {
        #[test]
        fn corruption_is_monotone_in_epsilon(seed in any::<u64>(), lo in 0.0f64..1.0, hi_extra in 0.0f64..1.0) {
            let hi = (lo + hi_extra).min(1.0);
            let target: Vec<TokenId> = (0..200).map(|i| (i % 9) as TokenId).collect();
            let rng = DeterministicRng::new(seed);
            let a = propose_corrupted(vocab(9), &target, lo, &rng).unwrap();
            let b = propose_corrupted(vocab(9), &target, hi, &rng).unwrap();
            for ((&t, &x), &y) in target.iter().zip(&a.tokens).zip(&b.tokens) {
                if x != t {
                    prop_assert_eq!(x, y);
                }
            }
        }

        #[test]
        fn proposals_never_contain_mask(seed in any::<u64>(), eps in 0.0f64..=1.0, v in 2usize..10) {
            let target: Vec<TokenId> = (0..64).map(|i| (i % v) as TokenId).collect();
            let p = propose_corrupted(vocab(v), &target, eps, &DeterministicRng::new(seed)).unwrap();
            prop_assert!(p.tokens.iter().all(|t| (*t as usize) < v));
        }
    }
}
