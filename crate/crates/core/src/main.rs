use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use warmdiff::harness::invariants::{check_metrics, check_outcome};
use warmdiff::harness::output::{write_csv, write_trace};
use warmdiff::harness::{sweep, Experiment, ExperimentConfig};
use warmdiff::{Error, StrategyRegistry};

#[derive(Parser)]
#[command(name = "warmdiff", version, about = "Warm-started masked-diffusion decoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one config and print aggregate metrics as JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write per-iteration JSON-lines traces here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write per-run CSV rows here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every point of the config's `grid.*` block and emit CSV.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a config and check every trace invariant.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Invariant(_) | Error::Shape { .. } | Error::Precondition(_) | Error::NonFinite { .. } => 2,
        _ => 1,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_run(config: &Path, trace: Option<&Path>, out: Option<&Path>) -> Result<(), Error> {
    let (cfg, base) = ExperimentConfig::load(config)?;
    if !cfg.grid.is_empty() {
        tracing::warn!("grid.* keys are ignored by `run`; use `sweep`");
    }
    let registry = StrategyRegistry::with_builtins();
    let exp = Experiment::build(cfg.clone(), &registry, &base)?;
    let outcomes = exp.run_all()?;
    let metrics = exp.metrics(0, &outcomes);

    if let Some(path) = trace {
        let mut w = create(path)?;
        write_trace(&mut w, &cfg, &outcomes)?;
        w.flush()?;
    }
    if let Some(path) = out {
        let mut w = create(path)?;
        write_csv(&mut w, &metrics.rows)?;
        w.flush()?;
    }
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, &metrics)?;
    writeln!(lock)?;
    Ok(())
}

fn cmd_sweep(grid: &Path, out: Option<&Path>) -> Result<(), Error> {
    let (cfg, base) = ExperimentConfig::load(grid)?;
    let registry = StrategyRegistry::with_builtins();
    let points = sweep(&cfg, &registry, &base)?;
    let rows: Vec<_> = points.iter().flat_map(|p| p.metrics.rows.iter().cloned()).collect();
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_csv(&mut w, &rows)?;
            w.flush()?;
        }
        None => write_csv(&mut io::stdout().lock(), &rows)?,
    }
    for p in &points {
        let m = &p.metrics;
        eprintln!(
            "grid {:>3} {:<24} rho={:<5} alpha={:<5} eps={:<5} tau={:<5} b0={:<5} lambda={:<5} \
             nfe={:>7.3}±{:<6.3} em={:.4} acc={:.4} capped={}",
            p.grid_id,
            p.config.warmstart.method.as_str(),
            p.config.warmstart.rho,
            p.config.warmstart.alpha,
            p.config.proposer.epsilon,
            p.config.decode.tau,
            p.config.decode.b0,
            p.config.decode.lambda,
            m.mean_nfe,
            m.std_nfe,
            m.exact_match_rate,
            m.mean_token_acc,
            m.capped_runs
        );
    }
    Ok(())
}

fn cmd_validate(config: &Path) -> Result<(), Error> {
    let (cfg, base) = ExperimentConfig::load(config)?;
    let registry = StrategyRegistry::with_builtins();
    let exp = Experiment::build(cfg.clone(), &registry, &base)?;
    let outcomes = exp.run_all()?;
    for o in &outcomes {
        check_outcome(o, exp.decode_config())?;
    }
    let metrics = exp.metrics(0, &outcomes);
    check_metrics(&metrics, cfg.experiment.n, cfg.decode.remask_enabled, cfg.warmstart.rho)?;
    println!("ok: {} runs, all invariants hold (mean nfe {:.3})", outcomes.len(), metrics.mean_nfe);
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(io::stderr)
        .with_ansi(io::stderr().is_terminal())
        .init();

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, trace, out } => cmd_run(config, trace.as_deref(), out.as_deref()),
        Command::Sweep { grid, out } => cmd_sweep(grid, out.as_deref()),
        Command::Validate { config } => cmd_validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
