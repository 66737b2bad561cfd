//! Warm-started masked-diffusion decoding.
//!
//! A masked diffusion decoder normally starts from a fully masked sequence.
//! This crate starts it from an auxiliary proposal instead, either by
//! injecting proposal tokens into a random subset of positions or by blending
//! proposal embeddings into the mask embedding, then decodes with
//! confidence-threshold parallel unmasking. Injected tokens the model does not
//! believe in can be stochastically remasked.
//!
//! The reverse model is a pluggable [`denoiser::Denoiser`]; the crate ships
//! synthetic ones so the whole pipeline runs at desk scale, and a
//! [`harness`] for seeded runs and parameter sweeps.

pub mod decoder;
pub mod denoiser;
pub mod domain;
pub mod error;
pub mod harness;
pub mod proposal;
pub mod registry;
pub mod rng;
pub mod warmstart;

pub use decoder::{decode, DecodeConfig, DecodeTrace, IterationRecord};
pub use domain::{all_mask_init, softmax, DiffusionState, EmbeddingTable, TokenId, Vocabulary};
pub use error::{Error, Result};
pub use registry::StrategyRegistry;
pub use rng::DeterministicRng;
pub use warmstart::{warm_init, WarmStartConfig, WarmStartMethod};
