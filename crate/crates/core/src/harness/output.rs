//! Results CSV and JSON-lines trace writers.

use std::io::Write;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::RunOutcome;
use super::metrics::{RunRow, CSV_COLUMNS};
use crate::decoder::IterationRecord;
use crate::error::Result;

/// Writes the header line then one line per row.
pub fn write_csv<W: Write>(w: &mut W, rows: &[RunRow]) -> Result<()> {
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.grid_id,
            r.method,
            r.rho,
            r.alpha,
            r.epsilon,
            r.tau,
            r.b0,
            r.lambda,
            r.run,
            r.seed,
            r.nfe,
            r.exact_match,
            r.token_acc,
            r.capped
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceHeader<'a> {
    config: &'a ExperimentConfig,
    run: usize,
    seed: u64,
    injected: usize,
    nfe: usize,
    capped: bool,
}

/// For each run: a header line with the resolved config, then one line per
/// iteration.
pub fn write_trace<W: Write>(w: &mut W, cfg: &ExperimentConfig, outcomes: &[RunOutcome]) -> Result<()> {
    let resolved = cfg.resolved();
    for o in outcomes {
        let header = TraceHeader {
            config: &resolved,
            run: o.run,
            seed: o.seed,
            injected: o.init.injected.len(),
            nfe: o.trace.nfe,
            capped: o.trace.capped,
        };
        serde_json::to_writer(&mut *w, &header)?;
        writeln!(w)?;
        for rec in &o.trace.records {
            write_record(w, rec)?;
        }
    }
    Ok(())
}

pub fn write_record<W: Write>(w: &mut W, rec: &IterationRecord) -> Result<()> {
    serde_json::to_writer(&mut *w, rec)?;
    writeln!(w)?;
    Ok(())
}
