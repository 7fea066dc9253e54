use std::path::PathBuf;

use clap::Subcommand;

use latentlens::editing::{
    fit_boundary, linear_edit_layers, morph, style_mix, AttributeBoundary, FitOptions,
};
use latentlens::types::{LatentRecord, Origin};
use latentlens::{load_archive, write_archive, LatentArchive};

use crate::commands::Context;
use crate::error::CliError;
use crate::io::{
    guard_archive_dir, guard_output, parse_layer_list, parse_list, read_json, write_json,
};
use crate::selectors::{select_codes, Selector};

#[derive(Subcommand)]
pub enum EditCommand {
    /// Fit an attribute boundary between two labeled groups.
    Boundary {
        #[arg(long)]
        archive: PathBuf,
        /// Positive-group selector, e.g. expression=Scream or age>=4.
        #[arg(long)]
        attr: String,
        /// Negative-group selector, e.g. expression=Neutral or age<4.
        #[arg(long)]
        neg: String,
        #[arg(long, default_value_t = 1e-3)]
        l2_reg: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Move records along a boundary normal.
    Apply {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        boundary: PathBuf,
        /// Edit strength; tune per image and attribute.
        #[arg(long)]
        alpha: f64,
        /// Comma-separated record ids.
        #[arg(long)]
        ids: String,
        /// Restrict the edit to these layers, e.g. 0-2,6.
        #[arg(long)]
        layers: Option<String>,
        /// Output archive directory of edited records.
        #[arg(long)]
        out: PathBuf,
    },
    /// Interpolate between two records at the given blending ratios.
    Morph {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Comma-separated ratios in [0,1].
        #[arg(long, default_value = "0.25,0.5,0.75")]
        ratios: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inject layers from a source record into a destination record.
    Mix {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        dst: String,
        #[arg(long)]
        src: String,
        /// Layers to take from the source, e.g. 0-2.
        #[arg(long)]
        layers: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn find_record<'a>(archive: &'a LatentArchive, id: &str) -> Result<&'a LatentRecord, CliError> {
    archive
        .get(id)
        .ok_or_else(|| CliError::new("archive", format!("no record with id {id:?}")))
}

pub fn run(cmd: EditCommand, ctx: &Context) -> Result<(), CliError> {
    match cmd {
        EditCommand::Boundary {
            archive,
            attr,
            neg,
            l2_reg,
            max_iter,
            tol,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let positive = Selector::parse(&attr)?;
            let negative = Selector::parse(&neg)?;
            let positives = select_codes(&archive, &positive, "--attr")?;
            let negatives = select_codes(&archive, &negative, "--neg")?;
            ctx.note(format!(
                "fitting {attr} vs {neg}: {} vs {} records",
                positives.len(),
                negatives.len()
            ));
            let boundary = fit_boundary(
                &attr,
                &positives,
                &negatives,
                &FitOptions {
                    l2_reg,
                    max_iter,
                    tol,
                },
            )?;
            if !boundary.diagnostics.converged {
                ctx.note(format!(
                    "fit stopped at max_iter={max_iter} before reaching tol={tol}"
                ));
            }
            write_json(&out, &boundary)?;
            Ok(())
        }
        EditCommand::Apply {
            archive,
            boundary,
            alpha,
            ids,
            layers,
            out,
        } => {
            guard_archive_dir(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let boundary: AttributeBoundary = read_json(&boundary)?;
            let layer_list = layers.as_deref().map(parse_layer_list).transpose()?;
            let ids: Vec<String> = ids
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            let mut records = Vec::with_capacity(ids.len());
            for id in &ids {
                let record = find_record(&archive, id)?;
                let mut edited = record.clone();
                edited.code =
                    linear_edit_layers(&record.code, &boundary, alpha, layer_list.as_deref())?;
                records.push(edited);
            }
            let edited = LatentArchive::new(archive.layout().clone(), records)?;
            write_archive(&edited, &out)?;
            Ok(())
        }
        EditCommand::Morph {
            archive,
            a,
            b,
            ratios,
            out,
        } => {
            guard_archive_dir(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let code_a = &find_record(&archive, &a)?.code;
            let code_b = &find_record(&archive, &b)?.code;
            let ratios: Vec<f64> = parse_list(&ratios, "ratio")?;
            let mut records = Vec::with_capacity(ratios.len());
            for t in &ratios {
                let mut record =
                    LatentRecord::new(format!("morph-{a}-{b}-{t}"), morph(code_a, code_b, *t)?);
                record.origin = Origin::Transferred;
                records.push(record);
            }
            let morphed = LatentArchive::new(archive.layout().clone(), records)?;
            write_archive(&morphed, &out)?;
            Ok(())
        }
        EditCommand::Mix {
            archive,
            dst,
            src,
            layers,
            out,
        } => {
            guard_archive_dir(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let dst_code = &find_record(&archive, &dst)?.code;
            let src_code = &find_record(&archive, &src)?.code;
            let layer_list = parse_layer_list(&layers)?;
            let mixed_code = style_mix(dst_code, src_code, &layer_list)?;
            let mut record = LatentRecord::new(format!("mix-{dst}-{src}-{layers}"), mixed_code);
            record.origin = Origin::Transferred;
            let mixed = LatentArchive::new(archive.layout().clone(), vec![record])?;
            write_archive(&mixed, &out)?;
            Ok(())
        }
    }
}
