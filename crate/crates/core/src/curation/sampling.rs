//! Diversity-weighted sampling without replacement, in the style of
//! k-means++ seeding: after a uniform first pick, each next record is drawn
//! with probability proportional to `d_min^exponent`, where `d_min` is its L2
//! distance (over the flattened style code) to the nearest already-selected
//! record.

use rand::Rng;
use serde::Serialize;

use crate::archive::LatentArchive;
use crate::rng::seeded_rng;

use super::CurationError;

/// Default weight exponent: squared distance, as in k-means++ D² seeding.
/// Set 1 for raw-distance weights.
pub const DEFAULT_WEIGHT_EXPONENT: f64 = 2.0;

/// An ordered selection of record ids plus the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSelection {
    pub ids: Vec<String>,
    pub seed: u64,
    pub exponent: f64,
    /// Normalized draw probabilities over all records for each random draw,
    /// recorded only when requested; selected records carry probability 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw_weights: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct SampleOptions {
    pub exponent: f64,
    /// Records forced into the selection before any random draw; they count
    /// toward `n`.
    pub initial_ids: Vec<String>,
    /// Record per-draw normalized weights in the selection (for tests).
    pub record_weights: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            exponent: DEFAULT_WEIGHT_EXPONENT,
            initial_ids: Vec::new(),
            record_weights: false,
        }
    }
}

struct FlatCodes {
    data: Vec<f64>,
    d: usize,
}

impl FlatCodes {
    fn from_archive(archive: &LatentArchive) -> Self {
        let d = archive.layout().total_channels();
        let mut data = Vec::with_capacity(archive.len() * d);
        for rec in archive.records() {
            data.extend(rec.code.iter_flat());
        }
        Self { data, d }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    super::entropy::sq_dist(a, b).sqrt()
}

/// `base^exponent`, via exact repeated multiplication for small integer
/// exponents so the default path stays bit-deterministic across platforms.
fn weight_pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

/// Diversity-weighted sample of `n` records with the default options.
pub fn weighted_diversity_sample(
    archive: &LatentArchive,
    n: usize,
    seed: u64,
    exponent: f64,
) -> Result<SampleSelection, CurationError> {
    weighted_diversity_sample_with(
        archive,
        n,
        seed,
        &SampleOptions {
            exponent,
            ..SampleOptions::default()
        },
    )
}

/// Uniform sampling without replacement, expressed as the weighted sampler
/// with exponent 0 (all residual weights equal).
pub fn uniform_sample(
    archive: &LatentArchive,
    n: usize,
    seed: u64,
) -> Result<SampleSelection, CurationError> {
    weighted_diversity_sample(archive, n, seed, 0.0)
}

/// Diversity-weighted sampling with explicit options.
///
/// The first record is drawn uniformly (unless `initial_ids` seeds the
/// selection); each subsequent record is drawn without replacement with
/// probability proportional to `d_min^exponent`. If every residual weight is
/// zero the draw falls back to uniform over the unselected records.
pub fn weighted_diversity_sample_with(
    archive: &LatentArchive,
    n: usize,
    seed: u64,
    options: &SampleOptions,
) -> Result<SampleSelection, CurationError> {
    let len = archive.len();
    if len == 0 {
        return Err(CurationError::EmptyArchive);
    }
    if n < 1 || n > len {
        return Err(CurationError::SampleSizeOutOfRange { n, len });
    }
    if !(options.exponent.is_finite() && options.exponent >= 0.0) {
        return Err(CurationError::InvalidExponent(options.exponent));
    }

    let codes = FlatCodes::from_archive(archive);
    let mut rng = seeded_rng(seed);
    let mut selected: Vec<usize> = Vec::with_capacity(n);
    let mut is_selected = vec![false; len];
    let mut dmin = vec![f64::INFINITY; len];
    let mut audit: Option<Vec<Vec<f64>>> = options.record_weights.then(Vec::new);

    // the sampler is sequential across draws by nature, and the per-draw
    // distance update is too little work to amortize a fork-join per draw,
    // so the whole selection runs on one thread
    let push = |idx: usize,
                selected: &mut Vec<usize>,
                is_selected: &mut Vec<bool>,
                dmin: &mut Vec<f64>| {
        selected.push(idx);
        is_selected[idx] = true;
        let new_row = codes.row(idx);
        for (i, dm) in dmin.iter_mut().enumerate() {
            let dist = l2_dist(codes.row(i), new_row);
            if dist < *dm {
                *dm = dist;
            }
        }
    };

    for id in &options.initial_ids {
        let idx = archive
            .index_of(id)
            .ok_or_else(|| CurationError::UnknownId(id.clone()))?;
        if is_selected[idx] {
            return Err(CurationError::DuplicateInitialId(id.clone()));
        }
        if selected.len() == n {
            return Err(CurationError::SampleSizeOutOfRange { n, len });
        }
        push(idx, &mut selected, &mut is_selected, &mut dmin);
    }

    if selected.is_empty() {
        if let Some(audit) = audit.as_mut() {
            audit.push(vec![1.0 / len as f64; len]);
        }
        let first = rng.random_range(0..len);
        push(first, &mut selected, &mut is_selected, &mut dmin);
    }

    while selected.len() < n {
        // scale by the max distance before exponentiation to dodge overflow
        let dmax = dmin
            .iter()
            .zip(&is_selected)
            .filter(|&(_, &sel)| !sel)
            .map(|(&d, _)| d)
            .fold(0.0f64, f64::max);

        let idx = if dmax == 0.0 {
            // all residual weights are zero: uniform over unselected
            if let Some(audit) = audit.as_mut() {
                let unselected = len - selected.len();
                audit.push(
                    is_selected
                        .iter()
                        .map(|&s| if s { 0.0 } else { 1.0 / unselected as f64 })
                        .collect(),
                );
            }
            let pick = rng.random_range(0..len - selected.len());
            is_selected
                .iter()
                .enumerate()
                .filter(|&(_, &s)| !s)
                .map(|(i, _)| i)
                .nth(pick)
                .expect("pick is in range")
        } else {
            let weights: Vec<f64> = dmin
                .iter()
                .zip(&is_selected)
                .map(|(&d, &sel)| {
                    if sel {
                        0.0
                    } else {
                        weight_pow(d / dmax, options.exponent)
                    }
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if let Some(audit) = audit.as_mut() {
                audit.push(weights.iter().map(|w| w / total).collect());
            }
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    acc += w;
                    if u < acc {
                        chosen = Some(i);
                        break;
                    }
                }
            }
            // float round-off can leave u barely past the last cumulative sum
            chosen.unwrap_or_else(|| {
                weights
                    .iter()
                    .rposition(|&w| w > 0.0)
                    .expect("dmax > 0 implies a positive weight")
            })
        };
        push(idx, &mut selected, &mut is_selected, &mut dmin);
    }

    Ok(SampleSelection {
        ids: selected
            .into_iter()
            .map(|i| archive.records()[i].id.clone())
            .collect(),
        seed,
        exponent: options.exponent,
        draw_weights: audit,
    })
}
