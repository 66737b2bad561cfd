//! Cartesian parameter sweeps.

use std::path::Path;

use super::config::{ExperimentConfig, GridSpec};
use super::experiment::{Experiment, RunOutcome};
use super::metrics::MetricsRecord;
use crate::error::Result;
use crate::registry::StrategyRegistry;

/// One grid point's results.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub grid_id: usize,
    pub config: ExperimentConfig,
    pub outcomes: Vec<RunOutcome>,
    pub metrics: MetricsRecord,
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

/// Expands `grid` over `base`. Axis order is method, rho, alpha, epsilon,
/// tau, b0, lambda, with the last axis varying fastest.
pub fn expand_grid(base: &ExperimentConfig, grid: &GridSpec) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for method in axis(&grid.method, base.warmstart.method) {
        for rho in axis(&grid.rho, base.warmstart.rho) {
            for alpha in axis(&grid.alpha, base.warmstart.alpha) {
                for epsilon in axis(&grid.epsilon, base.proposer.epsilon) {
                    for tau in axis(&grid.tau, base.decode.tau) {
                        for b0 in axis(&grid.b0, base.decode.b0) {
                            for lambda in axis(&grid.lambda, base.decode.lambda) {
                                let mut c = base.clone();
                                c.grid = GridSpec::default();
                                c.warmstart.method = method;
                                c.warmstart.rho = rho;
                                c.warmstart.alpha = alpha;
                                c.proposer.epsilon = epsilon;
                                c.decode.tau = tau;
                                c.decode.b0 = b0;
                                c.decode.lambda = lambda;
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Runs every grid point; results come back in grid order.
pub fn sweep(base: &ExperimentConfig, registry: &StrategyRegistry, base_dir: &Path) -> Result<Vec<SweepPoint>> {
    expand_grid(base, &base.grid)
        .into_iter()
        .enumerate()
        .map(|(grid_id, config)| {
            let exp = Experiment::build(config.clone(), registry, base_dir)?;
            let outcomes = exp.run_all()?;
            let metrics = exp.metrics(grid_id, &outcomes);
            Ok(SweepPoint { grid_id, config, outcomes, metrics })
        })
        .collect()
}
