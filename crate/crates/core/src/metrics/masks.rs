//! Rectangular region masks for evaluating facial-movement reconstruction.
//!
//! The eye rectangle spans 1/4 to 3/4 of the width and 1/4 to 1/2 of the
//! height. The mouth and whole-face rectangles are symmetric analogues (the
//! source material defines them only pictorially): mouth spans 1/4 to 3/4 of
//! the width and 1/2 to 7/8 of the height, whole-face 1/8 to 7/8 in both
//! axes. All bounds use floored pixel indices, lower inclusive, upper
//! exclusive. Callers can substitute their own mask rasters wherever a mask
//! is consumed.

use super::{MetricsError, Raster};

/// Which facial region an expression is evaluated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Mouth,
    Eye,
    WholeFace,
}

const MOUTH_EXPRESSIONS: [&str; 8] = [
    "Bared-teeth",
    "Bark",
    "Chewing",
    "Lip-smack",
    "Scream",
    "Threat",
    "Tongue-protrusion",
    "Tongue-show",
];

const EYE_EXPRESSIONS: [&str; 6] = [
    "Blink",
    "Brow-raise",
    "Look-up",
    "Look-down",
    "Look-left",
    "Look-right",
];

const WHOLE_FACE_EXPRESSIONS: [&str; 2] = ["Coo", "Yawn"];

/// Maps a canonical expression name to its evaluation region.
pub fn expression_region(expression: &str) -> Result<RegionKind, MetricsError> {
    if MOUTH_EXPRESSIONS.contains(&expression) {
        Ok(RegionKind::Mouth)
    } else if EYE_EXPRESSIONS.contains(&expression) {
        Ok(RegionKind::Eye)
    } else if WHOLE_FACE_EXPRESSIONS.contains(&expression) {
        Ok(RegionKind::WholeFace)
    } else {
        Err(MetricsError::UnknownExpression(expression.to_string()))
    }
}

fn rect_mask(
    width: usize,
    height: usize,
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
    region: &'static str,
) -> Result<Raster, MetricsError> {
    if x0 >= x1 || y0 >= y1 {
        return Err(MetricsError::DimsTooSmall {
            w: width,
            h: height,
            region,
        });
    }
    let mut mask = Raster::constant(width, height, 1, 0.0);
    for y in y0..y1 {
        for x in x0..x1 {
            mask.set(x, y, 0, 1.0);
        }
    }
    Ok(mask)
}

/// Eye-region mask: `[⌊W/4⌋, ⌊3W/4⌋) × [⌊H/4⌋, ⌊H/2⌋)`. Requires both
/// dimensions ≥ 4.
pub fn eye_mask(width: usize, height: usize) -> Result<Raster, MetricsError> {
    if width < 4 || height < 4 {
        return Err(MetricsError::DimsTooSmall {
            w: width,
            h: height,
            region: "eye",
        });
    }
    rect_mask(
        width,
        height,
        width / 4,
        3 * width / 4,
        height / 4,
        height / 2,
        "eye",
    )
}

/// Mouth-region mask: `[⌊W/4⌋, ⌊3W/4⌋) × [⌊H/2⌋, ⌊7H/8⌋)`.
pub fn mouth_mask(width: usize, height: usize) -> Result<Raster, MetricsError> {
    rect_mask(
        width,
        height,
        width / 4,
        3 * width / 4,
        height / 2,
        7 * height / 8,
        "mouth",
    )
}

/// Whole-face mask: `[⌊W/8⌋, ⌊7W/8⌋) × [⌊H/8⌋, ⌊7H/8⌋)`.
pub fn whole_face_mask(width: usize, height: usize) -> Result<Raster, MetricsError> {
    rect_mask(
        width,
        height,
        width / 8,
        7 * width / 8,
        height / 8,
        7 * height / 8,
        "whole-face",
    )
}

pub fn region_mask(kind: RegionKind, width: usize, height: usize) -> Result<Raster, MetricsError> {
    match kind {
        RegionKind::Mouth => mouth_mask(width, height),
        RegionKind::Eye => eye_mask(width, height),
        RegionKind::WholeFace => whole_face_mask(width, height),
    }
}

/// Default region mask for a canonical expression at the given raster size.
pub fn expression_region_mask(
    expression: &str,
    width: usize,
    height: usize,
) -> Result<Raster, MetricsError> {
    region_mask(expression_region(expression)?, width, height)
}
