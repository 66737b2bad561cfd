//! Per-run quality metrics and aggregate statistics.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::domain::TokenId;
use crate::error::{Error, Result};

fn check_len(out: &[TokenId], target: &[TokenId]) -> Result<()> {
    if out.len() != target.len() {
        return Err(Error::shape(format!("length {}", target.len()), format!("length {}", out.len())));
    }
    Ok(())
}

pub fn exact_match(out: &[TokenId], target: &[TokenId]) -> Result<bool> {
    check_len(out, target)?;
    Ok(out == target)
}

pub fn token_accuracy(out: &[TokenId], target: &[TokenId]) -> Result<f64> {
    check_len(out, target)?;
    if target.is_empty() {
        return Ok(1.0);
    }
    let hits = out.iter().zip(target).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / target.len() as f64)
}

/// One CSV row. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub grid_id: usize,
    pub method: String,
    pub rho: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub b0: f64,
    pub lambda: f64,
    pub run: usize,
    pub seed: u64,
    pub nfe: usize,
    pub exact_match: bool,
    pub token_acc: f64,
    pub capped: bool,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "grid_id", "method", "rho", "alpha", "epsilon", "tau", "b0", "lambda", "run", "seed", "nfe",
    "exact_match", "token_acc", "capped",
];

/// Aggregates over the runs of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub grid_id: usize,
    pub runs: usize,
    pub mean_nfe: f64,
    pub std_nfe: f64,
    pub exact_match_rate: f64,
    pub mean_token_acc: f64,
    pub capped_runs: usize,
    #[serde(skip)]
    pub rows: Vec<RunRow>,
}

impl MetricsRecord {
    pub fn from_rows(grid_id: usize, rows: Vec<RunRow>) -> Self {
        let nfe: Vec<f64> = rows.iter().map(|r| r.nfe as f64).collect();
        let acc: Vec<f64> = rows.iter().map(|r| r.token_acc).collect();
        let em: Vec<f64> = rows.iter().map(|r| f64::from(u8::from(r.exact_match))).collect();
        Self {
            grid_id,
            runs: rows.len(),
            mean_nfe: mean(&nfe),
            std_nfe: sample_std(&nfe),
            exact_match_rate: mean(&em),
            mean_token_acc: mean(&acc),
            capped_runs: rows.iter().filter(|r| r.capped).count(),
            rows,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); zero for one sample.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Two-sided Student-t confidence interval for the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ConfidenceInterval {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

pub fn mean_ci(xs: &[f64], level: f64) -> ConfidenceInterval {
    let m = mean(xs);
    if xs.len() < 2 {
        return ConfidenceInterval { mean: m, lo: m, hi: m };
    }
    let df = (xs.len() - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(0.5 + level / 2.0);
    let half = t * sample_std(xs) / (xs.len() as f64).sqrt();
    ConfidenceInterval { mean: m, lo: m - half, hi: m + half }
}
