//! Trace checks: replays a decode trace against its initial state and
//! verifies the loop's structural guarantees.

use std::collections::BTreeSet;

use super::experiment::RunOutcome;
use super::metrics::MetricsRecord;
use crate::decoder::DecodeConfig;
use crate::error::{Error, Result};

fn violation(run: usize, msg: String) -> Error {
    Error::Invariant(format!("run {run}: {msg}"))
}

/// Checks one run's trace:
///
/// - NFE equals the record count and iterations are numbered `1..=nfe`;
/// - every iteration unmasks at least one position, and only masked ones;
/// - only currently injected positions are remasked, each at most once,
///   with rates in `[0, 1]`;
/// - masked-count bookkeeping matches every record;
/// - replaying the events reproduces the final tokens;
/// - total iterations stay within `n + |I|`;
/// - an uncapped run ends with no masks, and a capped one used all of `k_max`.
pub fn check_outcome(o: &RunOutcome, dcfg: &DecodeConfig) -> Result<()> {
    let run = o.run;
    let t = &o.trace;
    let mask = o.init.vocab.mask_id();
    let n = o.init.len();
    let injected0 = o.init.injected.len();

    if t.nfe != t.records.len() {
        return Err(violation(run, format!("nfe {} != {} records", t.nfe, t.records.len())));
    }
    if t.nfe > n + injected0 {
        return Err(violation(run, format!("nfe {} exceeds n + |I| = {}", t.nfe, n + injected0)));
    }

    let mut tokens = o.init.tokens.clone();
    let mut injected: BTreeSet<usize> = o.init.injected.clone();
    let mut ever_remasked = BTreeSet::new();
    let mut model_decoded = BTreeSet::new();

    for (idx, rec) in t.records.iter().enumerate() {
        if rec.k != idx + 1 {
            return Err(violation(run, format!("record {idx} has k = {}", rec.k)));
        }
        if rec.unmasked.is_empty() {
            return Err(violation(run, format!("iteration {} unmasked nothing", rec.k)));
        }
        let before = tokens.iter().filter(|x| **x == mask).count();
        for ev in &rec.unmasked {
            if tokens[ev.pos] != mask {
                return Err(violation(run, format!("iteration {} unmasked fixed position {}", rec.k, ev.pos)));
            }
            if ev.tok == mask || !o.init.vocab.is_real(ev.tok) {
                return Err(violation(run, format!("iteration {} emitted invalid token {}", rec.k, ev.tok)));
            }
            tokens[ev.pos] = ev.tok;
            model_decoded.insert(ev.pos);
        }
        if !dcfg.remask_enabled && !rec.remasked.is_empty() {
            return Err(violation(run, format!("iteration {} remasked with remasking disabled", rec.k)));
        }
        for ev in &rec.remasked {
            if !(0.0..=1.0).contains(&ev.rate) {
                return Err(violation(run, format!("remask rate {} outside [0, 1]", ev.rate)));
            }
            if !injected.remove(&ev.pos) {
                return Err(violation(run, format!("iteration {} remasked non-injected position {}", rec.k, ev.pos)));
            }
            if model_decoded.contains(&ev.pos) || !ever_remasked.insert(ev.pos) {
                return Err(violation(run, format!("position {} remasked twice or after model decode", ev.pos)));
            }
            tokens[ev.pos] = mask;
        }
        let after = tokens.iter().filter(|x| **x == mask).count();
        if after != rec.masked_after || after + rec.unmasked.len() != before + rec.remasked.len() {
            return Err(violation(run, format!("masked-count bookkeeping broken at iteration {}", rec.k)));
        }
    }

    if tokens != t.tokens || tokens != o.output {
        return Err(violation(run, "replayed tokens differ from the reported output".into()));
    }
    let remaining = tokens.iter().filter(|x| **x == mask).count();
    if t.capped {
        if remaining == 0 || t.nfe != dcfg.k_max {
            return Err(violation(run, "capped flag inconsistent with trace".into()));
        }
    } else if remaining != 0 {
        return Err(violation(run, format!("{remaining} masked positions left in an uncapped run")));
    }
    // Injected positions that were never remasked keep their proposal token.
    for &i in &injected {
        if tokens[i] != o.proposal.tokens[i] {
            return Err(violation(run, format!("injected position {i} changed token")));
        }
    }
    Ok(())
}

/// Aggregate-level checks for one grid point.
pub fn check_metrics(m: &MetricsRecord, n: usize, remask_enabled: bool, rho: f64) -> Result<()> {
    if m.exact_match_rate > m.mean_token_acc + 1e-12 {
        return Err(Error::Invariant(format!(
            "exact-match rate {} exceeds mean token accuracy {}",
            m.exact_match_rate, m.mean_token_acc
        )));
    }
    if !remask_enabled && rho < 1.0 && m.mean_nfe > n as f64 {
        return Err(Error::Invariant(format!("mean NFE {} exceeds n = {n} without remasking", m.mean_nfe)));
    }
    Ok(())
}
