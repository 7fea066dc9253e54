//! Masked-region losses, mask geometry, composite loss with pluggable
//! perceptual terms, and per-expression evaluation with Holm-adjusted paired
//! t-tests.

mod loss;
mod masks;
mod raster;
mod report;
mod stats;

pub use loss::{
    composite_loss, masked_mse, mse_outside_mask, plain_mse, LossBreakdown, LossWeights,
    RasterMetric,
};
pub use masks::{
    expression_region, expression_region_mask, eye_mask, mouth_mask, region_mask, whole_face_mask,
    RegionKind,
};
pub use raster::{read_raster, write_raster, Raster};
pub use report::{
    per_expression_report, EvalPair, ExpressionReport, ExpressionRow, MaskSource, MethodSummary,
};
pub use stats::{holm_adjust, paired_t_test, PairedTTest};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("raster dimensions must be at least 1")]
    EmptyRaster,
    #[error("raster data length {got} does not match dimensions ({expected})")]
    RasterDataLength { expected: usize, got: usize },
    #[error("non-finite raster value")]
    NonFiniteValue,
    #[error("raster shapes do not match")]
    ShapeMismatch,
    #[error("mask must be a single-channel 0/1 raster")]
    NonBinaryMask,
    #[error("mask selects no pixels")]
    EmptyMask,
    #[error("mask complement selects no pixels")]
    EmptyMaskComplement,
    #[error("mask dimensions {w}x{h} too small for the {region} region")]
    DimsTooSmall {
        w: usize,
        h: usize,
        region: &'static str,
    },
    #[error("unknown expression {0:?}")]
    UnknownExpression(String),
    #[error("negative loss weight")]
    NegativeWeight,
    #[error("p-value {0} outside [0, 1]")]
    PValueOutOfRange(f64),
    #[error("paired samples must have equal length, got {a} and {b}")]
    UnequalSampleLength { a: usize, b: usize },
    #[error("need at least {min} paired samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("pair {id:?} for expression {expression:?} is missing method {method:?}")]
    UnpairedData {
        id: String,
        expression: String,
        method: String,
    },
    #[error("no pairs for method {0:?}")]
    MissingMethod(String),
    #[error("perceptual plugin failed: {0}")]
    Plugin(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
