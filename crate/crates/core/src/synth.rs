//! Planted-factor synthetic data: latent archives and rasters where
//! designated channels provably control designated attributes and regions,
//! so recovery claims elsewhere in the crate are testable against known
//! ground truth.
//!
//! Movement/neutral records are generated as matched pairs sharing the same
//! noise draw except on planted channels, so differential vectors are exactly
//! the planted shift at zero noise. Generated values are rounded through f32
//! so emitted archives round-trip bit-exactly.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::archive::ArchiveError;
use crate::metrics::Raster;
use crate::parallel;
use crate::rng::{derive_seed, seeded_rng};
use crate::types::{LatentRecord, Layout, Origin, Split, StyleCode};

/// Expression label given to the neutral half of every generated pair.
pub const NEUTRAL_LABEL: &str = "Neutral";

/// Background pixel value of rendered rasters.
pub const RENDER_BACKGROUND: f64 = 0.5;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("factor list is empty")]
    NoFactors,
    #[error("n_per_class must be at least 1")]
    InvalidCount,
    #[error("factor {name:?}: planted channel ({layer}, {channel}) outside layout")]
    PlantedOutOfRange {
        name: String,
        layer: usize,
        channel: usize,
    },
    #[error("factor {name:?} has no planted channels")]
    EmptyPlanted { name: String },
    #[error("factor {name:?} lists a planted channel twice")]
    DuplicatePlanted { name: String },
    #[error("factor {name:?}: effect_size must be in (0, 1e3]")]
    NonPositiveEffect { name: String },
    #[error("factor {name:?}: planted channel has zero base std")]
    ZeroPlantedStd { name: String },
    #[error("duplicate factor name {0:?}")]
    DuplicateFactorName(String),
    #[error("factor {name:?}: region outside the {w}x{h} raster")]
    RegionOutOfBounds { name: String, w: usize, h: usize },
    #[error("{field} must have one entry per channel ({expected}), got {got}")]
    ChannelArrayLength {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(
        "generator parameters must be finite, nonnegative where required, and of sane magnitude"
    )]
    InvalidParam,
    #[error("code does not match the spec layout")]
    LayoutMismatch,
    #[error(transparent)]
    Archive(#[from] ArchiveError),
}

/// Pixel rectangle, lower bounds inclusive, upper exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Region {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }
}

/// One planted attribute: which channels carry it, how strongly, and which
/// raster rectangle it controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedFactor {
    pub name: String,
    /// (layer, channel) addresses.
    pub planted_channels: Vec<(usize, usize)>,
    /// Mean shift in multiples of the channel's base std.
    pub effect_size: f64,
    pub region: Region,
}

/// Ground-truth generator specification, read from JSON. `base_mean` and
/// `base_std` accept either a per-channel array or a single scalar that
/// broadcasts to every channel.
#[derive(Debug, Clone, Serialize)]
pub struct PlantedFactorSpec {
    pub layout: Layout,
    pub base_mean: Vec<f64>,
    pub base_std: Vec<f64>,
    /// Noise scale in multiples of each channel's base std.
    pub noise_std: f64,
    /// (width, height) of rendered rasters.
    pub raster_size: (usize, usize),
    pub factors: Vec<PlantedFactor>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ChannelValues {
    Uniform(f64),
    PerChannel(Vec<f64>),
}

impl ChannelValues {
    fn expand(self, d: usize) -> Vec<f64> {
        match self {
            ChannelValues::Uniform(v) => vec![v; d],
            ChannelValues::PerChannel(v) => v,
        }
    }
}

#[derive(Deserialize)]
struct RawSpec {
    layout: Layout,
    base_mean: ChannelValues,
    base_std: ChannelValues,
    noise_std: f64,
    raster_size: (usize, usize),
    factors: Vec<PlantedFactor>,
}

impl<'de> Deserialize<'de> for PlantedFactorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawSpec::deserialize(deserializer)?;
        let d = raw.layout.total_channels();
        Ok(PlantedFactorSpec {
            layout: raw.layout,
            base_mean: raw.base_mean.expand(d),
            base_std: raw.base_std.expand(d),
            noise_std: raw.noise_std,
            raster_size: raw.raster_size,
            factors: raw.factors,
        })
    }
}

impl PlantedFactorSpec {
    /// Uniform base distribution over all channels.
    pub fn uniform(
        layout: Layout,
        base_mean: f64,
        base_std: f64,
        noise_std: f64,
        raster_size: (usize, usize),
        factors: Vec<PlantedFactor>,
    ) -> Self {
        let d = layout.total_channels();
        Self {
            layout,
            base_mean: vec![base_mean; d],
            base_std: vec![base_std; d],
            noise_std,
            raster_size,
            factors,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let d = self.layout.total_channels();
        if self.base_mean.len() != d {
            return Err(SynthError::ChannelArrayLength {
                field: "base_mean",
                expected: d,
                got: self.base_mean.len(),
            });
        }
        if self.base_std.len() != d {
            return Err(SynthError::ChannelArrayLength {
                field: "base_std",
                expected: d,
                got: self.base_std.len(),
            });
        }
        // magnitudes bounded so the on-disk f32 narrowing can never overflow
        let bounded = self
            .base_mean
            .iter()
            .chain(&self.base_std)
            .all(|v| v.is_finite() && v.abs() <= 1e30);
        if !bounded
            || !(0.0..=1e3).contains(&self.noise_std)
            || self.base_std.iter().any(|s| *s < 0.0)
        {
            return Err(SynthError::InvalidParam);
        }
        let (w, h) = self.raster_size;
        let mut names = std::collections::HashSet::new();
        for factor in &self.factors {
            if !names.insert(factor.name.as_str()) {
                return Err(SynthError::DuplicateFactorName(factor.name.clone()));
            }
            if factor.planted_channels.is_empty() {
                return Err(SynthError::EmptyPlanted {
                    name: factor.name.clone(),
                });
            }
            let mut seen = std::collections::HashSet::new();
            for &(layer, channel) in &factor.planted_channels {
                let flat = self.layout.flat_index(layer, channel).ok_or_else(|| {
                    SynthError::PlantedOutOfRange {
                        name: factor.name.clone(),
                        layer,
                        channel,
                    }
                })?;
                if !seen.insert(flat) {
                    return Err(SynthError::DuplicatePlanted {
                        name: factor.name.clone(),
                    });
                }
                if self.base_std[flat] == 0.0 {
                    return Err(SynthError::ZeroPlantedStd {
                        name: factor.name.clone(),
                    });
                }
            }
            if !(factor.effect_size > 0.0 && factor.effect_size <= 1e3) {
                return Err(SynthError::NonPositiveEffect {
                    name: factor.name.clone(),
                });
            }
            let r = &factor.region;
            if r.x0 >= r.x1 || r.y0 >= r.y1 || r.x1 > w || r.y1 > h {
                return Err(SynthError::RegionOutOfBounds {
                    name: factor.name.clone(),
                    w,
                    h,
                });
            }
        }
        Ok(())
    }

    fn flat_planted(&self, factor: &PlantedFactor) -> Vec<usize> {
        factor
            .planted_channels
            .iter()
            .map(|&(l, c)| self.layout.flat_index(l, c).expect("validated"))
            .collect()
    }
}

/// Unit direction of a factor's planted mean shift, over the flattened code.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorTruth {
    pub name: String,
    pub planted_channels: Vec<(usize, usize)>,
    pub effect_size: f64,
    pub direction: Vec<f64>,
}

/// What the generator actually planted, for recovery tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub n_per_class: usize,
    pub layout: Layout,
    pub factors: Vec<FactorTruth>,
}

/// Generates `n_per_class` movement records and `n_per_class` matched
/// neutral records per factor.
///
/// Pair `i` of factor `f` is drawn from its own RNG seeded by
/// `derive_seed(seed, f·n + i)`, so generation is order-independent and
/// parallel-safe. Movement records carry the factor name as their expression
/// label, neutrals carry [`NEUTRAL_LABEL`]; both halves of a pair share a
/// `source_id` for downstream pairing.
pub fn generate_dataset(
    spec: &PlantedFactorSpec,
    n_per_class: usize,
    seed: u64,
) -> Result<(crate::archive::LatentArchive, GroundTruth), SynthError> {
    spec.validate()?;
    if spec.factors.is_empty() {
        return Err(SynthError::NoFactors);
    }
    if n_per_class == 0 {
        return Err(SynthError::InvalidCount);
    }
    let d = spec.layout.total_channels();
    let total_pairs = spec.factors.len() * n_per_class;

    let pairs = parallel::map_indexed(total_pairs, |pair_index| {
        let factor = &spec.factors[pair_index / n_per_class];
        let i = pair_index % n_per_class;
        let planted = spec.flat_planted(factor);
        let mut rng = seeded_rng(derive_seed(seed, pair_index as u64));

        // Shared noise on every channel, then fresh draws for the planted
        // channels of the movement record.
        let shared: Vec<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let fresh: Vec<f64> = planted
            .iter()
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();

        let narrow = |v: f64| (v as f32) as f64;
        let mut neutral = vec![0.0; d];
        for c in 0..d {
            neutral[c] = narrow(spec.base_mean[c] + spec.noise_std * spec.base_std[c] * shared[c]);
        }
        let mut movement = neutral.clone();
        for (slot, &c) in planted.iter().enumerate() {
            movement[c] = narrow(
                spec.base_mean[c]
                    + factor.effect_size * spec.base_std[c]
                    + spec.noise_std * spec.base_std[c] * fresh[slot],
            );
        }

        let base_id = format!("{}-{i:05}", factor.name);
        let mut movement_rec = LatentRecord::new(
            format!("{base_id}-m"),
            StyleCode::from_flat(&spec.layout, &movement).expect("finite by construction"),
        );
        movement_rec.expression = Some(factor.name.clone());
        movement_rec.source_id = Some(base_id.clone());
        movement_rec.origin = Origin::Transferred;
        movement_rec.split = Split::Train;

        let mut neutral_rec = LatentRecord::new(
            format!("{base_id}-n"),
            StyleCode::from_flat(&spec.layout, &neutral).expect("finite by construction"),
        );
        neutral_rec.expression = Some(NEUTRAL_LABEL.to_string());
        neutral_rec.source_id = Some(base_id);
        neutral_rec.origin = Origin::Still;
        neutral_rec.split = Split::Train;

        (movement_rec, neutral_rec)
    });

    let mut records = Vec::with_capacity(2 * total_pairs);
    for (movement, neutral) in pairs {
        records.push(movement);
        records.push(neutral);
    }
    let archive = crate::archive::LatentArchive::new(spec.layout.clone(), records)?;

    let factors = spec
        .factors
        .iter()
        .map(|factor| {
            let mut direction = vec![0.0; d];
            for &c in &spec.flat_planted(factor) {
                direction[c] = factor.effect_size * spec.base_std[c];
            }
            let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut direction {
                *v /= norm;
            }
            FactorTruth {
                name: factor.name.clone(),
                planted_channels: factor.planted_channels.clone(),
                effect_size: factor.effect_size,
                direction,
            }
        })
        .collect();

    Ok((
        archive,
        GroundTruth {
            seed,
            n_per_class,
            layout: spec.layout.clone(),
            factors,
        },
    ))
}

/// Renders a code to a single-channel raster: each factor's region offsets
/// the background by the mean of that factor's planted channel values.
/// Deterministic and pure.
pub fn render(code: &StyleCode, spec: &PlantedFactorSpec) -> Result<Raster, SynthError> {
    spec.validate()?;
    if !code.matches_layout(&spec.layout) {
        return Err(SynthError::LayoutMismatch);
    }
    let (w, h) = spec.raster_size;
    let flat = code.flat();
    let mut raster = Raster::constant(w, h, 1, RENDER_BACKGROUND);
    for factor in &spec.factors {
        let planted = spec.flat_planted(factor);
        let mean = planted.iter().map(|&c| flat[c]).sum::<f64>() / planted.len() as f64;
        for y in factor.region.y0..factor.region.y1 {
            for x in factor.region.x0..factor.region.x1 {
                let v = raster.get(x, y, 0);
                raster.set(x, y, 0, v + mean);
            }
        }
    }
    Ok(raster)
}
