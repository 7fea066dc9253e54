use std::path::PathBuf;

use clap::Subcommand;
use serde::{Deserialize, Serialize};

use latentlens::curation::{
    bbox_track_filter, jackknife_entropy, split_dataset, sweep_sample_sizes,
    weighted_diversity_sample, BBox, DEFAULT_GROUPS, DEFAULT_IOU_THRESHOLD, DEFAULT_K,
    DEFAULT_SWEEP_SIZES, DEFAULT_WEIGHT_EXPONENT,
};
use latentlens::load_archive;

use crate::commands::Context;
use crate::error::CliError;
use crate::io::{guard_output, parse_list, read_jsonl, write_json, write_text};

#[derive(Subcommand)]
pub enum CurateCommand {
    /// Diversity-weighted sample of n records.
    Sample {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distance-weight exponent (2 = k-means++ style D², 0 = uniform).
        #[arg(long, default_value_t = DEFAULT_WEIGHT_EXPONENT)]
        exponent: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Jackknifed k-NN entropy of the whole archive.
    Entropy {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_GROUPS)]
        groups: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy across a ladder of sample sizes (CSV).
    Sweep {
        #[arg(long)]
        archive: PathBuf,
        /// Comma-separated sample sizes.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_GROUPS)]
        groups: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_WEIGHT_EXPONENT)]
        exponent: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Source-grouped train/test split assignment.
    Split {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Segment face tracks by bounding-box IoU.
    Tracks {
        /// JSONL rows {"frame_index":..,"x0":..,"y0":..,"x1":..,"y1":..}.
        #[arg(long)]
        bboxes: PathBuf,
        #[arg(long, default_value_t = DEFAULT_IOU_THRESHOLD)]
        iou: f64,
        /// Output JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
struct BBoxRow {
    frame_index: u64,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

#[derive(Serialize)]
struct SegmentDoc {
    start_frame: u64,
    end_frame: u64,
    frames: Vec<u64>,
}

pub fn run(cmd: CurateCommand, ctx: &Context) -> Result<(), CliError> {
    match cmd {
        CurateCommand::Sample {
            archive,
            n,
            seed,
            exponent,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let selection = weighted_diversity_sample(&archive, n, seed, exponent)?;
            write_json(&out, &selection)?;
            ctx.note(format!("sampled {n} of {} records", archive.len()));
            Ok(())
        }
        CurateCommand::Entropy {
            archive,
            k,
            groups,
            seed,
            out,
        } => {
            let archive = load_archive(&archive)?;
            let points: Vec<Vec<f64>> = archive.records().iter().map(|r| r.code.flat()).collect();
            let estimate = jackknife_entropy(&points, k, groups, seed)?;
            let doc = serde_json::json!({
                "value_nats": estimate.value,
                "stderr_nats": estimate.standard_error,
                "k": estimate.k,
                "n": estimate.n,
                "groups": groups,
                "method": "jackknife",
                "seed": seed,
            });
            match out {
                Some(path) => {
                    guard_output(&path, ctx.force)?;
                    write_json(&path, &doc)?;
                }
                None => println!("{doc}"),
            }
            Ok(())
        }
        CurateCommand::Sweep {
            archive,
            sizes,
            k,
            groups,
            seed,
            exponent,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let sizes: Vec<usize> = match sizes {
                Some(text) => parse_list(&text, "size")?,
                None => DEFAULT_SWEEP_SIZES.to_vec(),
            };
            let result = sweep_sample_sizes(&archive, &sizes, k, groups, seed, exponent)?;
            write_text(&out, &result.to_csv())?;
            if let Some(plateau) = result.plateau_size {
                println!("plateau_size={plateau}");
            }
            Ok(())
        }
        CurateCommand::Split {
            archive,
            fraction,
            seed,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let archive = load_archive(&archive)?;
            let assignments = split_dataset(&archive, fraction, seed)?;
            let doc = serde_json::json!({
                "seed": seed,
                "fraction": fraction,
                "assignments": assignments,
            });
            write_json(&out, &doc)?;
            Ok(())
        }
        CurateCommand::Tracks { bboxes, iou, out } => {
            let rows: Vec<BBoxRow> = read_jsonl(&bboxes)?;
            let frames: Vec<(u64, BBox)> = rows
                .into_iter()
                .map(|r| Ok((r.frame_index, BBox::new(r.x0, r.y0, r.x1, r.y1)?)))
                .collect::<Result<_, CliError>>()?;
            let segments = bbox_track_filter(&frames, iou)?;
            let docs: Vec<SegmentDoc> = segments
                .iter()
                .map(|segment| SegmentDoc {
                    start_frame: segment.first().expect("segments are nonempty").0,
                    end_frame: segment.last().expect("segments are nonempty").0,
                    frames: segment.iter().map(|(index, _)| *index).collect(),
                })
                .collect();
            let doc = serde_json::json!({ "iou_threshold": iou, "segments": docs });
            match out {
                Some(path) => {
                    guard_output(&path, ctx.force)?;
                    write_json(&path, &doc)?;
                }
                None => println!("{doc}"),
            }
            Ok(())
        }
    }
}
