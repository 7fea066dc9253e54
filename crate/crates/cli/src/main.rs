//! `latentlens` — one binary exposing the toolkit's subcommands.
//!
//! Exit codes: 0 on success, 1 on domain errors (machine-readable JSON on
//! stderr), 2 on usage errors. Every randomized subcommand takes an explicit
//! `--seed` (default 0) and records it in its output. Outputs are never
//! overwritten unless `--force` is given. `LATENTLENS_THREADS` bounds worker
//! parallelism (default: machine cores).

mod commands;
mod error;
mod io;
mod selectors;
mod svg;

use clap::{Parser, Subcommand};

/// Latent-space analysis toolkit: archives, sampling, entropy, boundaries,
/// style channels, masked losses.
///
/// Config precedence: CLI flag > built-in default. Defaults are documented
/// per flag; every random seed defaults to 0.
#[derive(Parser)]
#[command(name = "latentlens", version, max_term_width = 100)]
struct Cli {
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    force: bool,
    /// Print progress notes to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic planted-factor archives and rasters.
    #[command(subcommand)]
    Synth(commands::synth::SynthCommand),
    /// Dataset curation: sampling, entropy, sweeps, splits, track filters.
    #[command(subcommand)]
    Curate(commands::curate::CurateCommand),
    /// Attribute boundaries and latent edits.
    #[command(subcommand)]
    Edit(commands::edit::EditCommand),
    /// StyleSpace channel relevance, motion axes, projections.
    #[command(subcommand)]
    Space(commands::space::SpaceCommand),
    /// Masked-loss evaluation reports.
    #[command(subcommand)]
    Metrics(commands::metrics::MetricsCommand),
}

fn configure_threads() {
    if let Ok(value) = std::env::var("LATENTLENS_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn main() {
    let cli = Cli::parse();
    configure_threads();
    let ctx = commands::Context {
        force: cli.force,
        verbose: cli.verbose,
    };
    let result = match cli.command {
        Command::Synth(cmd) => commands::synth::run(cmd, &ctx),
        Command::Curate(cmd) => commands::curate::run(cmd, &ctx),
        Command::Edit(cmd) => commands::edit::run(cmd, &ctx),
        Command::Space(cmd) => commands::space::run(cmd, &ctx),
        Command::Metrics(cmd) => commands::metrics::run(cmd, &ctx),
    };
    if let Err(err) = result {
        eprintln!("{}", err.to_json());
        std::process::exit(1);
    }
}
