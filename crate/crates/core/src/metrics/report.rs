//! Per-expression evaluation tables with Holm-adjusted paired t-tests.

use std::collections::BTreeMap;

use crate::parallel;

use super::{expression_region_mask, holm_adjust, masked_mse, paired_t_test, MetricsError, Raster};

/// One evaluation item: a reconstructed image and its reference, tagged with
/// the expression and the method that produced it. Items are paired by `id`
/// across methods.
#[derive(Debug, Clone)]
pub struct EvalPair {
    pub id: String,
    pub expression: String,
    pub method: String,
    pub img: Raster,
    pub reference: Raster,
}

/// Where region masks come from: the built-in rectangles or user-supplied
/// rasters (which must match each pair's dimensions).
#[derive(Debug, Clone)]
pub enum MaskSource {
    Default,
    Custom {
        mouth: Raster,
        eye: Raster,
        whole_face: Raster,
    },
}

impl MaskSource {
    fn mask_for(
        &self,
        expression: &str,
        width: usize,
        height: usize,
    ) -> Result<Raster, MetricsError> {
        match self {
            MaskSource::Default => expression_region_mask(expression, width, height),
            MaskSource::Custom {
                mouth,
                eye,
                whole_face,
            } => {
                let mask = match super::expression_region(expression)? {
                    super::RegionKind::Mouth => mouth,
                    super::RegionKind::Eye => eye,
                    super::RegionKind::WholeFace => whole_face,
                };
                if mask.width() != width || mask.height() != height {
                    return Err(MetricsError::ShapeMismatch);
                }
                Ok(mask.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub n: usize,
}

fn summarize(method: &str, values: &[f64]) -> MethodSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    MethodSummary {
        method: method.to_string(),
        mean,
        std: var.sqrt(),
        n,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionRow {
    pub expression: String,
    pub baseline: MethodSummary,
    pub test: MethodSummary,
    pub p_raw: f64,
    pub p_holm: f64,
}

/// Evaluation table: per-expression region-masked MSE per method, with a
/// paired t-test per expression and Holm adjustment across the expression
/// family. MSE values are per-channel means over masked pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionReport {
    pub baseline_method: String,
    pub test_method: String,
    pub rows: Vec<ExpressionRow>,
}

impl ExpressionReport {
    /// CSV with columns `expression,method,mean,std,n,p_raw,p_holm`; the MSE
    /// convention is recorded in the leading comment line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# mse_convention=per-channel-mean\n");
        out.push_str("expression,method,mean,std,n,p_raw,p_holm\n");
        for row in &self.rows {
            for summary in [&row.baseline, &row.test] {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.expression,
                    summary.method,
                    summary.mean,
                    summary.std,
                    summary.n,
                    row.p_raw,
                    row.p_holm,
                ));
            }
        }
        out
    }
}

/// Builds the per-expression report for `baseline_method` vs `test_method`.
///
/// Requires every id to appear under both methods within its expression and
/// at least 2 pairs per expression.
pub fn per_expression_report(
    pairs: &[EvalPair],
    baseline_method: &str,
    test_method: &str,
    masks: &MaskSource,
) -> Result<ExpressionReport, MetricsError> {
    // Per-pair losses first; embarrassingly parallel.
    let losses = parallel::map_slice(pairs, |pair| {
        let mask = masks.mask_for(&pair.expression, pair.img.width(), pair.img.height())?;
        masked_mse(&pair.img, &pair.reference, &mask, 1.0)
    });

    // expression → id → method → loss, all ordered maps for determinism.
    let mut table: BTreeMap<&str, BTreeMap<&str, BTreeMap<&str, f64>>> = BTreeMap::new();
    for (pair, loss) in pairs.iter().zip(losses) {
        let loss = loss?;
        if pair.method != baseline_method && pair.method != test_method {
            continue;
        }
        table
            .entry(&pair.expression)
            .or_default()
            .entry(&pair.id)
            .or_default()
            .insert(&pair.method, loss);
    }
    if table.is_empty() {
        return Err(MetricsError::MissingMethod(baseline_method.to_string()));
    }

    let mut rows = Vec::with_capacity(table.len());
    let mut raw_pvalues = Vec::with_capacity(table.len());
    for (expression, by_id) in &table {
        let mut base_values = Vec::with_capacity(by_id.len());
        let mut test_values = Vec::with_capacity(by_id.len());
        for (id, by_method) in by_id {
            let missing = |method: &str| MetricsError::UnpairedData {
                id: id.to_string(),
                expression: expression.to_string(),
                method: method.to_string(),
            };
            base_values.push(
                *by_method
                    .get(baseline_method)
                    .ok_or_else(|| missing(baseline_method))?,
            );
            test_values.push(
                *by_method
                    .get(test_method)
                    .ok_or_else(|| missing(test_method))?,
            );
        }
        let t = paired_t_test(&base_values, &test_values)?;
        raw_pvalues.push(t.p);
        rows.push(ExpressionRow {
            expression: expression.to_string(),
            baseline: summarize(baseline_method, &base_values),
            test: summarize(test_method, &test_values),
            p_raw: t.p,
            p_holm: f64::NAN,
        });
    }

    let adjusted = holm_adjust(&raw_pvalues)?;
    for (row, p) in rows.iter_mut().zip(adjusted) {
        row.p_holm = p;
    }
    Ok(ExpressionReport {
        baseline_method: baseline_method.to_string(),
        test_method: test_method.to_string(),
        rows,
    })
}
