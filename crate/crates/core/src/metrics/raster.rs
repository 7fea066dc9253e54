//! Float rasters and their on-disk form.
//!
//! A raster file is raw IEEE-754 binary32 little-endian data, row-major with
//! interleaved channels, next to a JSON sidecar `<path>.json` holding
//! `{"w":..,"h":..,"c":..}`. Pixel values are conventionally in `[0,1]` but
//! are never quantized.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// A single- or multi-channel float image grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, MetricsError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(MetricsError::EmptyRaster);
        }
        if data.len() != width * height * channels {
            return Err(MetricsError::RasterDataLength {
                expected: width * height * channels,
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MetricsError::NonFiniteValue);
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
        .expect("constant raster dimensions must be nonzero")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Pixel count, the `A` of the masked-loss normalization.
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, channel: usize) -> usize {
        (y * self.width + x) * self.channels + channel
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.data[self.index(x, y, channel)]
    }

    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: f64) {
        let i = self.index(x, y, channel);
        self.data[i] = value;
    }

    /// True for a single-channel raster whose values are exactly 0 or 1.
    pub fn is_binary_mask(&self) -> bool {
        self.channels == 1 && self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Sum of a single-channel mask, the `ΣM` of the masked-loss terms.
    pub fn mask_sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    w: usize,
    h: usize,
    c: usize,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

fn open_with_context(path: &Path) -> Result<File, MetricsError> {
    File::open(path).map_err(|e| {
        MetricsError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster, MetricsError> {
    let path = path.as_ref();
    let sidecar: Sidecar =
        serde_json::from_reader(BufReader::new(open_with_context(&sidecar_path(path))?))?;
    let mut reader = BufReader::new(open_with_context(path)?);
    let len = sidecar.w * sidecar.h * sidecar.c;
    let mut bytes = vec![0u8; len * 4];
    reader.read_exact(&mut bytes)?;
    let mut trailing = [0u8; 1];
    if reader.read(&mut trailing)? != 0 {
        return Err(MetricsError::RasterDataLength {
            expected: len,
            got: len + 1,
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Raster::new(sidecar.w, sidecar.h, sidecar.c, data)
}

pub fn write_raster(raster: &Raster, path: impl AsRef<Path>) -> Result<(), MetricsError> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let sidecar = Sidecar {
        w: raster.width,
        h: raster.height,
        c: raster.channels,
    };
    let mut meta = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer(&mut meta, &sidecar)?;
    meta.write_all(b"\n")?;
    meta.flush()?;

    let mut out = BufWriter::new(File::create(path)?);
    for v in &raster.data {
        out.write_all(&(*v as f32).to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}
