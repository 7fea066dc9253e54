//! Latent archive directory format and population statistics.
//!
//! An archive directory holds three files:
//!
//! - `manifest.json` — `{"version":1,"count":<u64>,"layout":[c0,c1,...],"dtype":"f32le"}`
//! - `codes.bin` — `count × Σlayout` IEEE-754 binary32 little-endian values,
//!   row-major, no header, no padding
//! - `labels.jsonl` — one JSON object per record in row order with keys
//!   `id, expression, species, sex, age, yaw_deg, split, source_id, origin`;
//!   absent attributes are `null`
//!
//! Values are stored as 32-bit floats on disk and widened to 64-bit in
//! memory, so `load(write(a))` reproduces every float bit-exactly. Archives
//! are immutable after load; all operations here are pure functions over
//! immutable data.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{LatentRecord, Layout, Origin, Sex, Species, Split, StyleCode};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CODES_FILE: &str = "codes.bin";
pub const LABELS_FILE: &str = "labels.jsonl";
pub const ARCHIVE_VERSION: u32 = 1;
pub const DTYPE: &str = "f32le";

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("layout must contain at least one layer")]
    EmptyLayout,
    #[error("layout entries must be at least one channel")]
    ZeroChannelLayer,
    #[error("non-finite value encountered")]
    NonFiniteValue,
    #[error("flattened length mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: usize, got: usize },
    #[error("record {id:?} does not match the archive layout")]
    RecordLayoutMismatch { id: String },
    #[error("duplicate record id {id:?}")]
    DuplicateId { id: String },
    #[error("missing archive file {0}")]
    MissingFile(PathBuf),
    #[error("codes.bin holds {got} bytes, manifest implies {expected}")]
    SizeMismatch { expected: u64, got: u64 },
    #[error("manifest count {manifest} disagrees with {labels} label rows")]
    CountMismatch { manifest: u64, labels: u64 },
    #[error("unsupported archive version {0}")]
    UnsupportedVersion(u32),
    #[error("unsupported dtype {0:?}")]
    UnsupportedDtype(String),
    #[error("record id must be nonempty")]
    EmptyId,
    #[error("population statistics need at least 2 records, got {0}")]
    TooFewRecords(usize),
    #[error("label row {row}: {source}")]
    LabelRow {
        row: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    count: u64,
    layout: Vec<usize>,
    dtype: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    id: String,
    expression: Option<String>,
    species: Option<Species>,
    sex: Option<Sex>,
    age: Option<f64>,
    yaw_deg: Option<f64>,
    split: Split,
    source_id: Option<String>,
    origin: Origin,
}

/// An immutable set of latent records sharing one layout.
#[derive(Debug, Clone)]
pub struct LatentArchive {
    layout: Layout,
    records: Vec<LatentRecord>,
    by_id: HashMap<String, usize>,
}

impl PartialEq for LatentArchive {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.records == other.records
    }
}

impl LatentArchive {
    /// Validates layout agreement, id uniqueness and nonemptiness up front so
    /// downstream operations can assume them.
    pub fn new(layout: Layout, records: Vec<LatentRecord>) -> Result<Self, ArchiveError> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (index, rec) in records.iter().enumerate() {
            if rec.id.is_empty() {
                return Err(ArchiveError::EmptyId);
            }
            if !rec.code.matches_layout(&layout) {
                return Err(ArchiveError::RecordLayoutMismatch { id: rec.id.clone() });
            }
            if let Some(yaw) = rec.yaw_deg {
                if !yaw.is_finite() {
                    return Err(ArchiveError::NonFiniteValue);
                }
            }
            if by_id.insert(rec.id.clone(), index).is_some() {
                return Err(ArchiveError::DuplicateId { id: rec.id.clone() });
            }
        }
        Ok(Self {
            layout,
            records,
            by_id,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn records(&self) -> &[LatentRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LatentRecord> {
        self.by_id.get(id).map(|&index| &self.records[index])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatentRecord> {
        self.records.iter()
    }
}

/// Reads an archive directory. Codes are read row-major and labels joined by
/// row order.
pub fn load_archive(dir: impl AsRef<Path>) -> Result<LatentArchive, ArchiveError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let codes_path = dir.join(CODES_FILE);
    let labels_path = dir.join(LABELS_FILE);
    for p in [&manifest_path, &codes_path, &labels_path] {
        if !p.is_file() {
            return Err(ArchiveError::MissingFile(p.clone()));
        }
    }

    let manifest: Manifest = serde_json::from_reader(BufReader::new(File::open(&manifest_path)?))?;
    if manifest.version != ARCHIVE_VERSION {
        return Err(ArchiveError::UnsupportedVersion(manifest.version));
    }
    if manifest.dtype != DTYPE {
        return Err(ArchiveError::UnsupportedDtype(manifest.dtype));
    }
    let layout = Layout::new(manifest.layout)?;
    let row_len = layout.total_channels();

    let expected_bytes = manifest.count * row_len as u64 * 4;
    let actual_bytes = std::fs::metadata(&codes_path)?.len();
    if expected_bytes != actual_bytes {
        return Err(ArchiveError::SizeMismatch {
            expected: expected_bytes,
            got: actual_bytes,
        });
    }

    let mut labels = Vec::with_capacity(manifest.count as usize);
    for (row, line) in BufReader::new(File::open(&labels_path)?)
        .lines()
        .enumerate()
    {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: LabelRow =
            serde_json::from_str(&line).map_err(|source| ArchiveError::LabelRow { row, source })?;
        labels.push(parsed);
    }
    if labels.len() as u64 != manifest.count {
        return Err(ArchiveError::CountMismatch {
            manifest: manifest.count,
            labels: labels.len() as u64,
        });
    }

    let mut reader = BufReader::new(File::open(&codes_path)?);
    let mut row_bytes = vec![0u8; row_len * 4];
    let mut records = Vec::with_capacity(labels.len());
    for row in labels {
        reader.read_exact(&mut row_bytes)?;
        let mut flat = Vec::with_capacity(row_len);
        for chunk in row_bytes.chunks_exact(4) {
            flat.push(f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]) as f64);
        }
        records.push(LatentRecord {
            id: row.id,
            // from_flat rejects non-finite values read from disk
            code: StyleCode::from_flat(&layout, &flat)?,
            expression: row.expression,
            species: row.species,
            sex: row.sex,
            age: row.age,
            yaw_deg: row.yaw_deg,
            split: row.split,
            source_id: row.source_id,
            origin: row.origin,
        });
    }

    LatentArchive::new(layout, records)
}

/// Writes an archive directory. Byte output is deterministic for identical
/// input; in-memory values are narrowed to f32 on the way out.
pub fn write_archive(archive: &LatentArchive, dir: impl AsRef<Path>) -> Result<(), ArchiveError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let manifest = Manifest {
        version: ARCHIVE_VERSION,
        count: archive.len() as u64,
        layout: archive.layout().as_slice().to_vec(),
        dtype: DTYPE.to_string(),
    };
    let mut manifest_out = BufWriter::new(File::create(dir.join(MANIFEST_FILE))?);
    serde_json::to_writer(&mut manifest_out, &manifest)?;
    manifest_out.write_all(b"\n")?;
    manifest_out.flush()?;

    let mut codes_out = BufWriter::new(File::create(dir.join(CODES_FILE))?);
    let mut row_bytes = Vec::with_capacity(archive.layout().total_channels() * 4);
    for rec in archive.records() {
        row_bytes.clear();
        for v in rec.code.iter_flat() {
            row_bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        codes_out.write_all(&row_bytes)?;
    }
    codes_out.flush()?;

    let mut labels_out = BufWriter::new(File::create(dir.join(LABELS_FILE))?);
    for rec in archive.records() {
        let row = LabelRow {
            id: rec.id.clone(),
            expression: rec.expression.clone(),
            species: rec.species,
            sex: rec.sex,
            age: rec.age,
            yaw_deg: rec.yaw_deg,
            split: rec.split,
            source_id: rec.source_id.clone(),
            origin: rec.origin,
        };
        serde_json::to_writer(&mut labels_out, &row)?;
        labels_out.write_all(b"\n")?;
    }
    labels_out.flush()?;
    Ok(())
}

/// Per-channel mean and population standard deviation of an archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    pub layout: Layout,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Per-channel mean and population standard deviation (divide by N) over all
/// records. Treats records symmetrically, so the result is invariant under
/// record permutation up to float rounding.
pub fn population_stats(archive: &LatentArchive) -> Result<PopulationStats, ArchiveError> {
    let n = archive.len();
    if n < 2 {
        return Err(ArchiveError::TooFewRecords(n));
    }
    let d = archive.layout().total_channels();
    let mut mean = vec![0.0f64; d];
    for rec in archive.records() {
        for (m, v) in mean.iter_mut().zip(rec.code.iter_flat()) {
            *m += v;
        }
    }
    let inv_n = 1.0 / n as f64;
    for m in &mut mean {
        *m *= inv_n;
    }
    let mut var = vec![0.0f64; d];
    for rec in archive.records() {
        for ((s, v), m) in var.iter_mut().zip(rec.code.iter_flat()).zip(&mean) {
            let diff = v - m;
            *s += diff * diff;
        }
    }
    let std = var.into_iter().map(|s| (s * inv_n).sqrt()).collect();
    Ok(PopulationStats {
        layout: archive.layout().clone(),
        mean,
        std,
    })
}
