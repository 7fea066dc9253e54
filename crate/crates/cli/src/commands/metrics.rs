use std::path::{Path, PathBuf};

use clap::Subcommand;
use serde::Deserialize;

use latentlens::metrics::{per_expression_report, read_raster, EvalPair, MaskSource};

use crate::commands::Context;
use crate::error::CliError;
use crate::io::{guard_output, read_jsonl, write_text};

#[derive(Subcommand)]
pub enum MetricsCommand {
    /// Per-expression masked-MSE report with Holm-adjusted paired t-tests.
    Eval {
        /// JSONL rows {"id","expression","method","img","ref"} with raster
        /// paths relative to the pairs file.
        #[arg(long)]
        pairs: PathBuf,
        /// "default" for built-in region rectangles, or a directory holding
        /// mouth.bin / eye.bin / whole_face.bin raster masks.
        #[arg(long, default_value = "default")]
        masks: String,
        /// Baseline method name; defaults to the first method in the file.
        #[arg(long)]
        baseline: Option<String>,
        /// Test method name; defaults to the second method in the file.
        #[arg(long)]
        test: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Deserialize)]
struct PairRow {
    id: String,
    expression: String,
    method: String,
    img: PathBuf,
    #[serde(rename = "ref")]
    reference: PathBuf,
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

pub fn run(cmd: MetricsCommand, ctx: &Context) -> Result<(), CliError> {
    match cmd {
        MetricsCommand::Eval {
            pairs,
            masks,
            baseline,
            test,
            out,
        } => {
            guard_output(&out, ctx.force)?;
            let rows: Vec<PairRow> = read_jsonl(&pairs)?;
            if rows.is_empty() {
                return Err(CliError::usage("pairs file has no rows"));
            }
            let base = pairs.parent().unwrap_or(Path::new(".")).to_path_buf();
            let mut eval_pairs = Vec::with_capacity(rows.len());
            for row in rows {
                eval_pairs.push(EvalPair {
                    img: read_raster(resolve(&base, &row.img))?,
                    reference: read_raster(resolve(&base, &row.reference))?,
                    id: row.id,
                    expression: row.expression,
                    method: row.method,
                });
            }

            // first two distinct methods in file order are the default pair
            let mut methods: Vec<String> = Vec::new();
            for pair in &eval_pairs {
                if !methods.contains(&pair.method) {
                    methods.push(pair.method.clone());
                }
            }
            let baseline = match baseline {
                Some(name) => name,
                None => methods
                    .first()
                    .cloned()
                    .ok_or_else(|| CliError::usage("no methods in pairs file"))?,
            };
            let test = match test {
                Some(name) => name,
                None => methods
                    .iter()
                    .find(|m| **m != baseline)
                    .cloned()
                    .ok_or_else(|| CliError::usage("pairs file holds only one method"))?,
            };
            ctx.note(format!("comparing {baseline:?} (baseline) vs {test:?}"));

            let mask_source = if masks == "default" {
                MaskSource::Default
            } else {
                let dir = PathBuf::from(&masks);
                MaskSource::Custom {
                    mouth: read_raster(dir.join("mouth.bin"))?,
                    eye: read_raster(dir.join("eye.bin"))?,
                    whole_face: read_raster(dir.join("whole_face.bin"))?,
                }
            };

            let report = per_expression_report(&eval_pairs, &baseline, &test, &mask_source)?;
            write_text(&out, &report.to_csv())?;
            Ok(())
        }
    }
}
