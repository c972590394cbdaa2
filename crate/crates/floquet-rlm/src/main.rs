//! Thin scenario driver over the library. The interesting entry points are
//! the `examples/`; this binary exists for scripted, config-driven runs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use floquet_rlm::config::{OutputFormat, RunKind, ScenarioConfig};
use floquet_rlm::error::{Error, Result};
use floquet_rlm::runner;

#[derive(Parser)]
#[command(
    name = "floquet-rlm",
    version,
    about = "Time-resolved charge, energy, and heat fluxes of a driven resonant level"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-period time trace of all fluxes and residuals.
    Trace(RunArgs),
    /// Slow-driving expansion with the universal-resistance fit.
    Adiabatic(RunArgs),
    /// Cross-path identity audit (moderate drive ratios only).
    Audit(RunArgs),
    /// Joule-law scatter data, one branch per drive amplitude.
    Fig2(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML). Omitted: built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the scenario's `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the parallel sweeps (overrides `threads`).
    #[arg(long)]
    threads: Option<usize>,
    /// Table format (overrides `output.format`).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn execute(kind: RunKind, args: &RunArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    let mut scenario = cfg.resolve(kind)?;
    if let Some(out) = &args.out {
        scenario.out_dir = out.clone();
    }
    if let Some(format) = args.format {
        scenario.format = format;
    }
    if let Some(threads) = args.threads.or(scenario.threads) {
        if threads == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        // Ignore the error from re-initialization: the pool is global and
        // the first configuration wins, which is the CLI's own.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let files = runner::run(&scenario)?;
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Trace(a) => (RunKind::Trace, a),
        Command::Adiabatic(a) => (RunKind::Adiabatic, a),
        Command::Audit(a) => (RunKind::Audit, a),
        Command::Fig2(a) => (RunKind::Fig2, a),
    };
    if let Err(err) = execute(kind, args) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
