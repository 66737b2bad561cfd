use super::{check_lengths, DenoiseContext, Denoiser, LogitMatrix};
use crate::domain::DiffusionState;
use crate::error::{Error, Result};

/// Replays a fixed logit matrix per decode iteration. Iteration `k` (1-based)
/// reads entry `k - 1`; iterations past the end reuse the last entry.
#[derive(Debug, Clone)]
pub struct ScriptedDenoiser {
    script: Vec<LogitMatrix>,
}

impl ScriptedDenoiser {
    pub fn new(script: Vec<LogitMatrix>) -> Result<Self> {
        if script.is_empty() {
            return Err(Error::ModelNotFitted("empty logit script".into()));
        }
        Ok(Self { script })
    }
}

impl Denoiser for ScriptedDenoiser {
    fn name(&self) -> &str {
        "scripted"
    }

    fn denoise(&self, state: &DiffusionState, ctx: &DenoiseContext) -> Result<LogitMatrix> {
        check_lengths(state, ctx)?;
        let idx = state.iteration.saturating_sub(1).min(self.script.len() - 1);
        let m = &self.script[idx];
        if m.rows() != state.len() || m.cols() != state.vocab.size() {
            return Err(Error::shape(
                format!("{}x{}", state.len(), state.vocab.size()),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        Ok(m.clone())
    }
}

/// Flat logits everywhere: every confidence is `1 / V`.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformDenoiser;

impl Denoiser for UniformDenoiser {
    fn name(&self) -> &str {
        "uniform"
    }

    fn denoise(&self, state: &DiffusionState, ctx: &DenoiseContext) -> Result<LogitMatrix> {
        check_lengths(state, ctx)?;
        Ok(LogitMatrix::zeros(state.len(), state.vocab.size()))
    }
}
