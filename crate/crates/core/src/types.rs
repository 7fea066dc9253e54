//! Domain types shared by every module: layered style codes, labeled latent
//! records, and the label vocabulary.

use serde::{Deserialize, Serialize};

use crate::archive::ArchiveError;

/// The canonical facial-expression vocabulary.
///
/// Expression labels are stored as open strings so synthetic datasets can
/// plant arbitrary factor names; operations that require one of the canonical
/// names (e.g. region-mask selection) validate against this list.
pub const CANONICAL_EXPRESSIONS: [&str; 16] = [
    "Bared-teeth",
    "Bark",
    "Blink",
    "Brow-raise",
    "Chewing",
    "Coo",
    "Lip-smack",
    "Scream",
    "Threat",
    "Tongue-protrusion",
    "Yawn",
    "Look-up",
    "Look-down",
    "Look-left",
    "Look-right",
    "Tongue-show",
];

/// Returns true if `name` is one of the 16 canonical expression names.
pub fn is_canonical_expression(name: &str) -> bool {
    CANONICAL_EXPRESSIONS.contains(&name)
}

/// Per-layer channel counts of an archive's style codes.
///
/// The layout is data, not a hard-coded architecture: channel indexing
/// conventions differ between exporters, so every (layer, channel) address is
/// resolved against the layout that shipped with the archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout(Vec<usize>);

impl Layout {
    pub fn new(per_layer: Vec<usize>) -> Result<Self, ArchiveError> {
        if per_layer.is_empty() {
            return Err(ArchiveError::EmptyLayout);
        }
        if per_layer.contains(&0) {
            return Err(ArchiveError::ZeroChannelLayer);
        }
        Ok(Self(per_layer))
    }

    pub fn n_layers(&self) -> usize {
        self.0.len()
    }

    /// Total channel count across all layers (the flattened dimension).
    pub fn total_channels(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn channels_in_layer(&self, layer: usize) -> Option<usize> {
        self.0.get(layer).copied()
    }

    /// Maps a (layer, channel) address to its index in the flattened code.
    pub fn flat_index(&self, layer: usize, channel: usize) -> Option<usize> {
        let &width = self.0.get(layer)?;
        if channel >= width {
            return None;
        }
        Some(self.0[..layer].iter().sum::<usize>() + channel)
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn address_of(&self, flat: usize) -> Option<(usize, usize)> {
        let mut offset = 0;
        for (layer, &width) in self.0.iter().enumerate() {
            if flat < offset + width {
                return Some((layer, flat - offset));
            }
            offset += width;
        }
        None
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// A layered latent vector for one image: one channel vector per generator
/// layer. Values are unitless reals; all finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleCode {
    layers: Vec<Vec<f64>>,
}

impl StyleCode {
    /// Builds a code from per-layer channel vectors, rejecting empty and
    /// non-finite input.
    pub fn new(layers: Vec<Vec<f64>>) -> Result<Self, ArchiveError> {
        if layers.is_empty() {
            return Err(ArchiveError::EmptyLayout);
        }
        if layers.iter().any(|l| l.is_empty()) {
            return Err(ArchiveError::ZeroChannelLayer);
        }
        if layers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ArchiveError::NonFiniteValue);
        }
        Ok(Self { layers })
    }

    /// Reshapes a flattened vector against `layout`.
    pub fn from_flat(layout: &Layout, flat: &[f64]) -> Result<Self, ArchiveError> {
        if flat.len() != layout.total_channels() {
            return Err(ArchiveError::LayoutMismatch {
                expected: layout.total_channels(),
                got: flat.len(),
            });
        }
        let mut layers = Vec::with_capacity(layout.n_layers());
        let mut offset = 0;
        for &width in layout.as_slice() {
            layers.push(flat[offset..offset + width].to_vec());
            offset += width;
        }
        Self::new(layers)
    }

    pub fn zeros(layout: &Layout) -> Self {
        Self {
            layers: layout.as_slice().iter().map(|&w| vec![0.0; w]).collect(),
        }
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    pub fn layout(&self) -> Layout {
        Layout(self.layers.iter().map(Vec::len).collect())
    }

    pub fn matches_layout(&self, layout: &Layout) -> bool {
        self.layers.len() == layout.n_layers()
            && self
                .layers
                .iter()
                .zip(layout.as_slice())
                .all(|(l, &w)| l.len() == w)
    }

    pub fn total_channels(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Copies the code into a single flattened vector (layer order).
    pub fn flat(&self) -> Vec<f64> {
        self.layers.iter().flatten().copied().collect()
    }

    pub fn iter_flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flatten().copied()
    }

    pub fn get(&self, layer: usize, channel: usize) -> Option<f64> {
        self.layers.get(layer)?.get(channel).copied()
    }

    pub(crate) fn layers_mut(&mut self) -> &mut Vec<Vec<f64>> {
        &mut self.layers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Japanese,
    Rhesus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Where a record's image came from in the dataset-construction pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Still,
    RealVideoFrame,
    CgVideoFrame,
    Transferred,
}

/// A style code plus its labels. Missing labels are explicit `None`, never
/// sentinel numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentRecord {
    pub id: String,
    pub code: StyleCode,
    pub expression: Option<String>,
    pub species: Option<Species>,
    pub sex: Option<Sex>,
    /// Age in years.
    pub age: Option<f64>,
    pub yaw_deg: Option<f64>,
    pub split: Split,
    /// Still-image origin for motion-transferred frames.
    pub source_id: Option<String>,
    pub origin: Origin,
}

impl LatentRecord {
    /// A record with no optional labels, split `Train`, origin `Still`.
    pub fn new(id: impl Into<String>, code: StyleCode) -> Self {
        Self {
            id: id.into(),
            code,
            expression: None,
            species: None,
            sex: None,
            age: None,
            yaw_deg: None,
            split: Split::Train,
            source_id: None,
            origin: Origin::Still,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_flat_index_round_trips() {
        let layout = Layout::new(vec![4, 3, 5]).unwrap();
        assert_eq!(layout.total_channels(), 12);
        assert_eq!(layout.flat_index(0, 0), Some(0));
        assert_eq!(layout.flat_index(1, 0), Some(4));
        assert_eq!(layout.flat_index(2, 4), Some(11));
        assert_eq!(layout.flat_index(1, 3), None);
        assert_eq!(layout.flat_index(3, 0), None);
        for flat in 0..12 {
            let (l, c) = layout.address_of(flat).unwrap();
            assert_eq!(layout.flat_index(l, c), Some(flat));
        }
        assert_eq!(layout.address_of(12), None);
    }

    #[test]
    fn layout_rejects_degenerate_shapes() {
        assert!(matches!(
            Layout::new(vec![]),
            Err(ArchiveError::EmptyLayout)
        ));
        assert!(matches!(
            Layout::new(vec![4, 0]),
            Err(ArchiveError::ZeroChannelLayer)
        ));
    }

    #[test]
    fn style_code_rejects_non_finite() {
        assert!(matches!(
            StyleCode::new(vec![vec![1.0, f64::NAN]]),
            Err(ArchiveError::NonFiniteValue)
        ));
        assert!(matches!(
            StyleCode::new(vec![vec![f64::INFINITY]]),
            Err(ArchiveError::NonFiniteValue)
        ));
    }

    #[test]
    fn style_code_flat_round_trip() {
        let layout = Layout::new(vec![2, 3]).unwrap();
        let code = StyleCode::new(vec![vec![1.0, 2.0], vec![3.0, 4.0, 5.0]]).unwrap();
        assert!(code.matches_layout(&layout));
        let flat = code.flat();
        assert_eq!(flat, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(StyleCode::from_flat(&layout, &flat).unwrap(), code);
    }

    #[test]
    fn canonical_expression_lookup() {
        assert!(is_canonical_expression("Bared-teeth"));
        assert!(is_canonical_expression("Tongue-show"));
        assert!(!is_canonical_expression("Neutral"));
        assert_eq!(CANONICAL_EXPRESSIONS.len(), 16);
    }
}
