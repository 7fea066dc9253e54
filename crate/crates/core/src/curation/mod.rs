//! Dataset selection machinery: diversity-weighted sampling, k-NN entropy
//! with jackknife resampling, sample-size sweeps, video-metadata filters, and
//! second-round dataset assembly.

mod assemble;
mod entropy;
mod filters;
mod jackknife;
mod sampling;
mod sweep;

pub use assemble::{
    build_second_round_manifest, split_dataset, split_groups, CompositionReport, CompositionRow,
    DrivingQuota, SecondRoundParams, TransferredFrame,
};
pub use entropy::{knn_entropy, EntropyEstimate, EntropyMethod, DEFAULT_K};
pub use filters::{
    bbox_track_filter, head_pose_filter, BBox, DEFAULT_IOU_THRESHOLD, DEFAULT_MAX_ABS_YAW,
};
pub use jackknife::{jackknife, jackknife_entropy, jackknife_folds, Jackknife, DEFAULT_GROUPS};
pub use sampling::{
    uniform_sample, weighted_diversity_sample, weighted_diversity_sample_with, SampleOptions,
    SampleSelection, DEFAULT_WEIGHT_EXPONENT,
};
pub use sweep::{sweep_sample_sizes, SweepResult, SweepRow, DEFAULT_SWEEP_SIZES};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurationError {
    #[error("archive has no records")]
    EmptyArchive,
    #[error("sample size {n} out of range 1..={len}")]
    SampleSizeOutOfRange { n: usize, len: usize },
    #[error("unknown record id {0:?}")]
    UnknownId(String),
    #[error("id {0:?} listed twice in the initial selection")]
    DuplicateInitialId(String),
    #[error("weight exponent {0} must be finite and nonnegative")]
    InvalidExponent(f64),
    #[error("entropy estimation needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("points must share one nonzero dimension")]
    DimensionMismatch,
    #[error("non-finite coordinate in entropy input")]
    NonFinite,
    #[error("neighbor count k must be at least 1")]
    InvalidK,
    #[error("groups {groups} out of range 2..={n}")]
    GroupsOutOfRange { groups: usize, n: usize },
    #[error("sweep size {size} exceeds the {len} available records")]
    SweepSizeTooLarge { size: usize, len: usize },
    #[error("frame indices must be strictly increasing")]
    UnsortedFrames,
    #[error("invalid bounding box ({x0}, {y0}, {x1}, {y1})")]
    InvalidBBox { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("train fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("quota of {wanted} exceeds the {available} available frames for {pool}")]
    QuotaExceedsAvailable {
        wanted: usize,
        available: usize,
        pool: String,
    },
    #[error("split contamination: source {source_id:?} appears in both train and test")]
    SplitContamination { source_id: String },
    #[error("transferred record {id:?} has no source_id")]
    MissingSourceId { id: String },
    #[error("record {id:?} references unknown source {source_id:?}")]
    UnknownSource { id: String, source_id: String },
    #[error("records do not share one layout")]
    MixedLayouts,
    #[error(transparent)]
    Archive(#[from] crate::archive::ArchiveError),
}
