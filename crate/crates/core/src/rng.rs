//! Counter-based deterministic randomness.
//!
//! Every random decision in a decode is addressed by a
//! `(seed, purpose, position, iteration)` tuple and computed as a pure
//! function of that address. There is no hidden stream state, so turning one
//! feature off (say, an injection rate of zero) can never shift the draws
//! another feature sees.
//!
//! The mixer is the SplitMix64 finalizer applied once per absorbed word.
//! Purpose labels are hashed with 64-bit FNV-1a, which is stable across
//! platforms and releases.

/// Stream labels used throughout the crate.
pub mod purpose {
    pub const INJECT_GATE: &str = "inject-gate";
    pub const EMBED_DROP: &str = "embed-drop";
    pub const REMASK: &str = "remask";
    pub const PROPOSAL_CORRUPT: &str = "proposal-corrupt";
    /// Substitute-token choice for corrupted positions. Kept separate from the
    /// corruption gate so the gate stays a single `draw < epsilon` comparison.
    pub const PROPOSAL_SUBSTITUTE: &str = "proposal-corrupt/substitute";
    pub const PROPOSAL_MARKOV: &str = "proposal-markov";
    pub const TARGET: &str = "target";
    pub const EMBEDDING_TABLE: &str = "embedding-table";
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix_finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    splitmix_finalize(state.wrapping_add(GOLDEN) ^ word)
}

/// 64-bit FNV-1a over the label bytes.
pub fn purpose_hash(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Seeded, stateless source of uniform draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeterministicRng {
    seed: u64,
}

impl DeterministicRng {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw 64-bit output for an address.
    pub fn bits(&self, purpose: &str, position: u64, iteration: u64) -> u64 {
        let mut h = splitmix_finalize(self.seed ^ GOLDEN);
        h = absorb(h, purpose_hash(purpose));
        h = absorb(h, position);
        absorb(h, iteration)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn draw(&self, purpose: &str, position: u64, iteration: u64) -> f64 {
        (self.bits(purpose, position, iteration) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `[0, bound)`. `bound` must be non-zero.
    pub fn index(&self, purpose: &str, position: u64, iteration: u64, bound: usize) -> usize {
        debug_assert!(bound > 0);
        let u = self.draw(purpose, position, iteration);
        ((u * bound as f64) as usize).min(bound - 1)
    }

    /// Bernoulli(p) realized as `draw < p`.
    pub fn bernoulli(&self, purpose: &str, position: u64, iteration: u64, p: f64) -> bool {
        self.draw(purpose, position, iteration) < p
    }

    /// Index into a discrete distribution by inverse CDF.
    pub fn categorical(&self, purpose: &str, position: u64, iteration: u64, probs: &[f64]) -> usize {
        let total: f64 = probs.iter().sum();
        let u = self.draw(purpose, position, iteration) * total;
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding can leave `u` just above the accumulated sum.
        probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }
}
