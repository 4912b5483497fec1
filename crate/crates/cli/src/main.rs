//! `qntk`: runs one configured experiment per invocation and writes CSV
//! artifacts plus a manifest; `qntk plotdata <dir>` turns those into
//! long-format plot tables.
//!
//! Exit codes: 0 success, 1 I/O or other runtime failure, 2 configuration
//! error, 3 numerical divergence. `QNTK_THREADS` caps the worker threads.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod experiments;
mod plotdata;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use error::CliError;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(name = "qntk", version, about = "Quantum-classical NTK experiment runner")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(RunArgs),
    /// Write long-format plot tables for a finished run directory.
    Plotdata { dir: PathBuf },
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `section.key=value`, repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn configure_threads() -> Result<usize, CliError> {
    if let Ok(v) = std::env::var("QNTK_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Config(format!("QNTK_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(rayon::current_num_threads())
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let path = args.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let cfg = config::load(&path, &args.overrides, args.seed, args.out.as_deref())?;
    let threads = configure_threads()?;
    std::fs::create_dir_all(&cfg.out)?;
    let resolved = cfg.to_toml();
    std::fs::write(cfg.out.join("config.toml"), &resolved)?;

    let start = Instant::now();
    let mut art = experiments::Artifacts::new(&cfg.out);
    let summary = experiments::run(&cfg, &mut art)?;
    let wall = start.elapsed().as_secs_f64();

    let manifest = json!({
        "experiment": cfg.experiment.name(),
        "seed": cfg.seed,
        "derived_seeds": art.seeds,
        "config": resolved,
        "artifacts": art.files,
        "summary": summary,
        "threads": threads,
        "wall_time_s": wall,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(cfg.out.join("manifest.json"), text + "\n")?;
    println!("{} finished in {wall:.2}s; artifacts in {}", cfg.experiment.name(), cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Run(a)) => run(a),
        Some(Command::Plotdata { dir }) => plotdata::emit(&dir).map(|files| {
            println!("wrote {} plot tables to {}", files.len(), dir.join("plotdata").display());
        }),
        None => run(cli.run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
