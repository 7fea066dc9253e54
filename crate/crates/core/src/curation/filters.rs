//! Video-metadata filters: IoU-based face-track segmentation and head-pose
//! clip selection. These consume metadata only; no video decoding happens
//! here.

use serde::{Deserialize, Serialize};

use super::CurationError;

/// Default IoU threshold for keeping consecutive frames in one track.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.2;

/// Default head-yaw acceptance bound in degrees.
pub const DEFAULT_MAX_ABS_YAW: f64 = 15.0;

/// Axis-aligned pixel bounding box, `x1 > x0`, `y1 > y0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, CurationError> {
        let b = Self { x0, y0, x1, y1 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), CurationError> {
        let finite = [self.x0, self.y0, self.x1, self.y1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x1 <= self.x0 || self.y1 <= self.y0 {
            return Err(CurationError::InvalidBBox {
                x0: self.x0,
                y0: self.y0,
                x1: self.x1,
                y1: self.y1,
            });
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Intersection over union.
    pub fn iou(&self, other: &BBox) -> f64 {
        let ix = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let iy = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }
}

/// Splits a frame sequence into maximal contiguous track segments.
///
/// A split happens whenever the frame index jumps (gap in detection) or the
/// IoU between consecutive boxes drops below `iou_threshold`. The returned
/// segments partition the input in order.
pub fn bbox_track_filter(
    frames: &[(u64, BBox)],
    iou_threshold: f64,
) -> Result<Vec<Vec<(u64, BBox)>>, CurationError> {
    for (_, bbox) in frames {
        bbox.validate()?;
    }
    if frames.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(CurationError::UnsortedFrames);
    }

    let mut segments = Vec::new();
    let mut current: Vec<(u64, BBox)> = Vec::new();
    for &(index, bbox) in frames {
        if let Some(&(prev_index, prev_bbox)) = current.last() {
            let contiguous = index == prev_index + 1;
            if !contiguous || prev_bbox.iou(&bbox) < iou_threshold {
                segments.push(std::mem::take(&mut current));
            }
        }
        current.push((index, bbox));
    }
    if !current.is_empty() {
        segments.push(current);
    }
    Ok(segments)
}

/// Keeps clip ids whose first-frame yaw satisfies `|yaw| ≤ max_abs_yaw`
/// (boundary inclusive). Non-finite yaws are dropped.
pub fn head_pose_filter(clips: &[(String, f64)], max_abs_yaw: f64) -> Vec<String> {
    clips
        .iter()
        .filter(|(_, yaw)| yaw.abs() <= max_abs_yaw)
        .map(|(id, _)| id.clone())
        .collect()
}
