use std::path::PathBuf;

use clap::Subcommand;

use latentlens::metrics::write_raster;
use latentlens::synth::{generate_dataset, render, PlantedFactorSpec};
use latentlens::{load_archive, write_archive};

use crate::commands::Context;
use crate::error::CliError;
use crate::io::{guard_archive_dir, guard_output, read_json, write_json};

#[derive(Subcommand)]
pub enum SynthCommand {
    /// Generate a planted-factor archive plus ground_truth.json.
    Generate {
        /// Planted-factor spec (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Records per class per factor.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output archive directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render one record's code to a raster file.
    Render {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        archive: PathBuf,
        /// Record id to render.
        #[arg(long)]
        id: String,
        /// Output raster path (raw f32le + JSON sidecar).
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cmd: SynthCommand, ctx: &Context) -> Result<(), CliError> {
    match cmd {
        SynthCommand::Generate { spec, n, seed, out } => {
            guard_archive_dir(&out, ctx.force)?;
            let spec: PlantedFactorSpec = read_json(&spec)?;
            let (archive, truth) = generate_dataset(&spec, n, seed)?;
            write_archive(&archive, &out)?;
            write_json(&out.join("ground_truth.json"), &truth)?;
            ctx.note(format!(
                "generated {} records ({} factors, seed {seed}) into {}",
                archive.len(),
                truth.factors.len(),
                out.display()
            ));
            Ok(())
        }
        SynthCommand::Render {
            spec,
            archive,
            id,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let spec: PlantedFactorSpec = read_json(&spec)?;
            let archive = load_archive(&archive)?;
            let record = archive
                .get(&id)
                .ok_or_else(|| CliError::new("archive", format!("no record with id {id:?}")))?;
            let raster = render(&record.code, &spec)?;
            write_raster(&raster, &out)?;
            Ok(())
        }
    }
}
