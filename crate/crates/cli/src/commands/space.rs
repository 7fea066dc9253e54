use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Subcommand;
use serde::{Deserialize, Serialize};

use latentlens::population_stats;
use latentlens::stylespace::{
    axis_projection, axis_score, channel_relevance, differential_set, top_k_channels, AxisChannel,
    ChannelRelevance, MotionAxis, Normalization,
};
use latentlens::synth::NEUTRAL_LABEL;
use latentlens::types::Layout;
use latentlens::{load_archive, LatentArchive};

use crate::commands::Context;
use crate::error::CliError;
use crate::io::{guard_output, read_json, write_json, write_text};
use crate::svg::{emit_scatter_svg, ScatterPoint};

#[derive(Subcommand)]
pub enum SpaceCommand {
    /// Per-channel relevance θ of one expression vs its paired neutrals.
    Relevance {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        expr: String,
        #[arg(long, default_value = NEUTRAL_LABEL)]
        neutral_label: String,
        /// Subtract the population mean only (skip the σ rescale).
        #[arg(long)]
        mean_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Motion axis: θ_r = mean positive relevance − mean negative relevance.
    Axis {
        #[arg(long)]
        archive: PathBuf,
        /// Comma-separated positive expressions.
        #[arg(long)]
        pos: String,
        /// Comma-separated negative expressions.
        #[arg(long)]
        neg: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Layers excluded from the ranking (comma-separated; "" for none).
        #[arg(long, default_value = "0")]
        exclude_layers: String,
        #[arg(long, default_value = NEUTRAL_LABEL)]
        neutral_label: String,
        #[arg(long, default_value = "axis")]
        name: String,
        #[arg(long)]
        mean_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project records onto two axes; CSV scatter plus optional SVG.
    Project {
        #[arg(long)]
        archive: PathBuf,
        /// Two axis JSON files: x-axis,y-axis.
        #[arg(long)]
        axes: String,
        #[arg(long)]
        mean_only: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

/// On-disk form of a motion axis, with the sets that defined it.
#[derive(Serialize, Deserialize)]
pub struct AxisDoc {
    pub name: String,
    pub k: usize,
    pub excluded_layers: Vec<usize>,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
    pub normalization: Normalization,
    pub layout: Layout,
    pub channels: Vec<AxisChannel>,
}

fn normalization(mean_only: bool) -> Normalization {
    if mean_only {
        Normalization::MeanOnly
    } else {
        Normalization::MeanStd
    }
}

fn relevances_for(
    archive: &LatentArchive,
    expressions: &[String],
    neutral_label: &str,
    norm: Normalization,
) -> Result<Vec<ChannelRelevance>, CliError> {
    let stats = population_stats(archive)?;
    expressions
        .iter()
        .map(|expression| {
            let set = differential_set(archive, expression, neutral_label, &stats, norm)?;
            Ok(channel_relevance(&set)?)
        })
        .collect()
}

fn split_names(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub fn run(cmd: SpaceCommand, ctx: &Context) -> Result<(), CliError> {
    match cmd {
        SpaceCommand::Relevance {
            archive,
            expr,
            neutral_label,
            mean_only,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let relevance =
                relevances_for(&archive, &[expr], &neutral_label, normalization(mean_only))?
                    .pop()
                    .expect("one expression in, one relevance out");
            write_json(&out, &relevance)?;
            Ok(())
        }
        SpaceCommand::Axis {
            archive,
            pos,
            neg,
            k,
            exclude_layers,
            neutral_label,
            name,
            mean_only,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let norm = normalization(mean_only);
            let positives = split_names(&pos);
            let negatives = split_names(&neg);
            let mut all = positives.clone();
            all.extend(negatives.clone());
            let relevances = relevances_for(&archive, &all, &neutral_label, norm)?;
            let score = axis_score(&relevances, &positives, &negatives)?;
            let excluded: BTreeSet<usize> = crate::io::parse_layer_list(&exclude_layers)?
                .into_iter()
                .collect();
            let axis = top_k_channels(&score, k, &excluded, &name)?;
            ctx.note(format!(
                "axis {name}: top channel (layer {}, channel {})",
                axis.channels[0].layer, axis.channels[0].channel
            ));
            let doc = AxisDoc {
                name: axis.name,
                k: axis.k,
                excluded_layers: axis.excluded_layers,
                positives,
                negatives,
                normalization: norm,
                layout: axis.layout,
                channels: axis.channels,
            };
            write_json(&out, &doc)?;
            Ok(())
        }
        SpaceCommand::Project {
            archive,
            axes,
            mean_only,
            out,
            svg,
        } => {
            guard_output(&out, ctx.force)?;
            if let Some(svg_path) = &svg {
                guard_output(svg_path, ctx.force)?;
            }
            let archive = load_archive(&archive)?;
            let stats = population_stats(&archive)?;
            let paths: Vec<&str> = axes.split(',').map(str::trim).collect();
            if paths.len() != 2 {
                return Err(CliError::usage(
                    "--axes needs exactly two files: x-axis,y-axis",
                ));
            }
            let load_axis = |path: &str| -> Result<MotionAxis, CliError> {
                let doc: AxisDoc = read_json(std::path::Path::new(path))?;
                Ok(MotionAxis {
                    name: doc.name,
                    k: doc.k,
                    excluded_layers: doc.excluded_layers,
                    layout: doc.layout,
                    channels: doc.channels,
                })
            };
            let x_axis = load_axis(paths[0])?;
            let y_axis = load_axis(paths[1])?;
            let norm = normalization(mean_only);
            let codes: Vec<_> = archive.records().iter().map(|r| r.code.clone()).collect();
            let xs = axis_projection(&codes, &x_axis, &stats, norm)?;
            let ys = axis_projection(&codes, &y_axis, &stats, norm)?;

            let mut csv = String::from("id,expression,x,y\n");
            let mut points = Vec::with_capacity(archive.len());
            for ((rec, x), y) in archive.records().iter().zip(&xs).zip(&ys) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    rec.id,
                    rec.expression.as_deref().unwrap_or(""),
                    x,
                    y
                );
                points.push(ScatterPoint {
                    id: rec.id.clone(),
                    expression: rec.expression.clone(),
                    x: *x,
                    y: *y,
                });
            }
            write_text(&out, &csv)?;
            if let Some(svg_path) = svg {
                let doc = emit_scatter_svg(&points, &x_axis.name, &y_axis.name);
                write_text(&svg_path, &doc)?;
            }
            Ok(())
        }
    }
}
