//! Wiring of one configured experiment: target, proposal, warm start,
//! decode, metrics.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, TargetRule};
use super::corpus::load_corpus;
use super::metrics::{exact_match, token_accuracy, MetricsRecord, RunRow};
use crate::decoder::{decode, DecodeConfig, DecodeTrace};
use crate::denoiser::{BigramModel, DenoiseContext, Denoiser};
use crate::domain::{DiffusionState, EmbeddingTable, TokenId, Vocabulary};
use crate::error::{Error, Result};
use crate::proposal::{Proposal, Proposer};
use crate::registry::{Resources, StrategyRegistry};
use crate::rng::{purpose, DeterministicRng};
use crate::warmstart::{warm_init_with, WarmStart};

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub target: Vec<TokenId>,
    pub proposal: Proposal,
    pub init: DiffusionState,
    pub output: Vec<TokenId>,
    pub trace: DecodeTrace,
    pub exact_match: bool,
    pub token_acc: f64,
}

impl RunOutcome {
    pub fn row(&self, grid_id: usize, cfg: &ExperimentConfig) -> RunRow {
        RunRow {
            grid_id,
            method: cfg.warmstart.method.as_str().to_string(),
            rho: cfg.warmstart.rho,
            alpha: cfg.warmstart.alpha,
            epsilon: cfg.proposer.epsilon,
            tau: cfg.decode.tau,
            b0: cfg.decode.b0,
            lambda: cfg.decode.lambda,
            run: self.run,
            seed: self.seed,
            nfe: self.trace.nfe,
            exact_match: self.exact_match,
            token_acc: self.token_acc,
            capped: self.trace.capped,
        }
    }
}

/// Run seed for index `run`: the base seed XOR the index.
pub fn run_seed(base: u64, run: usize) -> u64 {
    base ^ run as u64
}

#[derive(Debug)]
pub struct Experiment<'r> {
    cfg: ExperimentConfig,
    vocab: Vocabulary,
    dcfg: DecodeConfig,
    table: Arc<EmbeddingTable>,
    bigram: Option<Arc<BigramModel>>,
    denoiser: Box<dyn Denoiser>,
    proposer: Box<dyn Proposer>,
    warm: &'r dyn WarmStart,
}

impl<'r> Experiment<'r> {
    /// `base_dir` anchors a relative `corpus.path`.
    pub fn build(cfg: ExperimentConfig, registry: &'r StrategyRegistry, base_dir: &Path) -> Result<Self> {
        cfg.validate()?;
        let vocab = Vocabulary::new(cfg.experiment.vocab)?;
        let bigram = match &cfg.corpus.path {
            Some(p) => {
                let path = if p.is_absolute() { p.clone() } else { base_dir.join(p) };
                let corpus = load_corpus(&path, vocab)?;
                Some(Arc::new(BigramModel::fit(vocab, &corpus).map_err(|e| Error::Config(e.to_string()))?))
            }
            None => None,
        };
        if cfg.experiment.target == TargetRule::Markov && bigram.is_none() {
            return Err(Error::Config("experiment.target = \"markov\" needs corpus.path".into()));
        }
        let res = Resources { bigram: bigram.clone() };
        let to_config = |e: Error| match e {
            Error::ModelNotFitted(m) => Error::Config(m),
            other => other,
        };
        let denoiser = registry.build_denoiser(&cfg.denoiser, &res).map_err(to_config)?;
        let proposer = registry.build_proposer(&cfg.proposer, &res).map_err(to_config)?;
        let warm = registry.warm_start(cfg.warmstart.method.as_str())?;
        let table = Arc::new(EmbeddingTable::random(
            vocab,
            cfg.experiment.dim,
            &DeterministicRng::new(cfg.experiment.seed),
        )?);
        let dcfg = cfg.decode.resolve(cfg.experiment.n);
        Ok(Self { cfg, vocab, dcfg, table, bigram, denoiser, proposer, warm })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn decode_config(&self) -> &DecodeConfig {
        &self.dcfg
    }

    pub fn embedding_table(&self) -> &EmbeddingTable {
        &self.table
    }

    fn target(&self, rng: &DeterministicRng) -> Result<Vec<TokenId>> {
        let n = self.cfg.experiment.n;
        match self.cfg.experiment.target {
            TargetRule::Uniform => {
                Ok((0..n).map(|i| rng.index(purpose::TARGET, i as u64, 0, self.vocab.size()) as TokenId).collect())
            }
            TargetRule::Markov => {
                let model = self.bigram.as_ref().expect("checked in build");
                let mut out: Vec<TokenId> = Vec::with_capacity(n);
                for i in 0..n {
                    let dist = match out.last() {
                        Some(&prev) => model.forward(prev),
                        None => model.unigram(),
                    };
                    out.push(rng.categorical(purpose::TARGET, i as u64, 0, &dist) as TokenId);
                }
                Ok(out)
            }
        }
    }

    /// Deterministic in `(config, run)`.
    pub fn run_one(&self, run: usize) -> Result<RunOutcome> {
        let seed = run_seed(self.cfg.experiment.seed, run);
        let rng = DeterministicRng::new(seed);
        let target = self.target(&rng)?;
        let proposal = self.proposer.propose(self.vocab, &target, &rng)?;
        let init = warm_init_with(self.warm, self.vocab, &proposal, &self.table, &self.cfg.warmstart, &rng)?;
        let ctx = DenoiseContext::new(target.clone(), Some(self.table.clone()))?;
        let (output, trace) = decode(self.denoiser.as_ref(), &ctx, init.clone(), &self.dcfg, &self.cfg.warmstart, &rng)?;
        let exact = exact_match(&output, &target)?;
        let acc = token_accuracy(&output, &target)?;
        Ok(RunOutcome { run, seed, target, proposal, init, output, trace, exact_match: exact, token_acc: acc })
    }

    /// All runs, in run order regardless of scheduling.
    pub fn run_all(&self) -> Result<Vec<RunOutcome>> {
        (0..self.cfg.experiment.num_runs).into_par_iter().map(|r| self.run_one(r)).collect()
    }

    pub fn metrics(&self, grid_id: usize, outcomes: &[RunOutcome]) -> MetricsRecord {
        MetricsRecord::from_rows(grid_id, outcomes.iter().map(|o| o.row(grid_id, &self.cfg)).collect())
    }
}
