use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use wideband_cli::check::{run_one, CRITERIA, DEFAULT_CHECK_SEED};
use wideband_cli::config::load_config;
use wideband_cli::sweep::run_sweep;

#[derive(Parser)]
#[command(name = "wideband", version, about = "Wideband non-coherent MIMO capacity and reliability sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a quantity over the grid in a TOML config and write CSV.
    Sweep {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output path; `-` is standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the oracle-versus-closed-form suite and print a pass/fail table.
    Check {
        #[arg(long, default_value_t = DEFAULT_CHECK_SEED)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(k) => Ok(rayon::ThreadPoolBuilder::new().num_threads(k).build()?.install(f)),
        None => Ok(f()),
    }
}

fn sweep(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, threads: Option<usize>) -> Result<ExitCode> {
    let mut config = load_config(&config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if out.is_some() {
        config.output = out;
    }
    let summary = match config.output.as_deref() {
        Some(path) if path.as_os_str() != "-" => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            with_threads(threads, || run_sweep(&config, BufWriter::new(file)))??
        }
        _ => with_threads(threads, || run_sweep(&config, io::stdout().lock()))??,
    };
    eprintln!(
        "{} rows, {} failed, seed {}, {:.2?}",
        summary.rows,
        summary.failed_rows.len(),
        summary.seed,
        summary.elapsed
    );
    for (row, message) in &summary.failed_rows {
        eprintln!("row {row}: {message}");
    }
    Ok(if summary.failed_rows.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn check(seed: u64, threads: Option<usize>) -> Result<ExitCode> {
    let start = Instant::now();
    let mut stdout = io::stdout().lock();
    let mut results = Vec::new();
    for id in CRITERIA {
        let step = Instant::now();
        let result = with_threads(threads, || run_one(id, seed))??;
        writeln!(stdout, "{}", result.line())?;
        stdout.flush()?;
        eprintln!("criterion {id} took {:.2?}", step.elapsed());
        results.push(result);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(stdout, "{} passed, {failed} failed", results.len() - failed)?;
    eprintln!("check finished in {:.2?}", start.elapsed());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep { config, seed, out, threads } => sweep(config, seed, out, threads),
        Command::Check { seed, threads } => check(seed, threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
