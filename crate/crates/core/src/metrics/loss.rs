//! Masked and composite reconstruction losses.
//!
//! The masked L2 term is `λ · (A/ΣM) · ‖(I − Î) ∘ M‖²` with `‖·‖²` read as a
//! per-pixel mean, which reduces to `λ` times the mean squared difference
//! over masked pixels and all channels. All MSE values here are per-channel
//! means, so the weights stay commensurate with the plain image MSE.

use super::{MetricsError, Raster};

/// Weights of the composite reconstruction loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub lambda_l2: f64,
    pub lambda_lpips: f64,
    pub lambda_sim: f64,
    pub lambda_l2_eye: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_l2: 1.0,
            lambda_lpips: 0.8,
            lambda_sim: 0.5,
            lambda_l2_eye: 10.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let ws = [
            self.lambda_l2,
            self.lambda_lpips,
            self.lambda_sim,
            self.lambda_l2_eye,
        ];
        if ws.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MetricsError::NegativeWeight);
        }
        Ok(())
    }
}

/// A pure raster-pair metric plugged into the composite loss (stand-in for
/// perceptual or identity networks, which are out of scope here).
pub trait RasterMetric {
    fn evaluate(&self, img: &Raster, reference: &Raster) -> Result<f64, MetricsError>;
}

impl<F> RasterMetric for F
where
    F: Fn(&Raster, &Raster) -> Result<f64, MetricsError>,
{
    fn evaluate(&self, img: &Raster, reference: &Raster) -> Result<f64, MetricsError> {
        self(img, reference)
    }
}

fn check_pair(img: &Raster, reference: &Raster) -> Result<(), MetricsError> {
    if !img.same_shape(reference) {
        return Err(MetricsError::ShapeMismatch);
    }
    Ok(())
}

fn check_mask(img: &Raster, mask: &Raster) -> Result<(), MetricsError> {
    if mask.width() != img.width() || mask.height() != img.height() {
        return Err(MetricsError::ShapeMismatch);
    }
    if !mask.is_binary_mask() {
        return Err(MetricsError::NonBinaryMask);
    }
    Ok(())
}

/// Sum of squared differences over pixels selected by `select`, plus the
/// selected pixel count.
fn region_sum(img: &Raster, reference: &Raster, mask: &Raster, inside: bool) -> (f64, usize) {
    let c = img.channels();
    let (a, b, m) = (img.data(), reference.data(), mask.data());
    let mut sum = 0.0;
    let mut count = 0;
    for (pixel, &mv) in m.iter().enumerate() {
        if (mv == 1.0) == inside {
            count += 1;
            let base = pixel * c;
            for ch in 0..c {
                let diff = a[base + ch] - b[base + ch];
                sum += diff * diff;
            }
        }
    }
    (sum, count)
}

/// Masked mean squared error: `lambda` times the mean over masked pixels (and
/// all channels) of the squared difference.
pub fn masked_mse(
    img: &Raster,
    reference: &Raster,
    mask: &Raster,
    lambda: f64,
) -> Result<f64, MetricsError> {
    check_pair(img, reference)?;
    check_mask(img, mask)?;
    let (sum, count) = region_sum(img, reference, mask, true);
    if count == 0 {
        return Err(MetricsError::EmptyMask);
    }
    Ok(lambda * sum / (count as f64 * img.channels() as f64))
}

/// Mean squared error over the whole image (per-channel mean).
pub fn plain_mse(img: &Raster, reference: &Raster) -> Result<f64, MetricsError> {
    check_pair(img, reference)?;
    let mut sum = 0.0;
    for (a, b) in img.data().iter().zip(reference.data()) {
        let diff = a - b;
        sum += diff * diff;
    }
    Ok(sum / img.data().len() as f64)
}

/// Mean squared error over the mask complement.
pub fn mse_outside_mask(
    img: &Raster,
    reference: &Raster,
    mask: &Raster,
) -> Result<f64, MetricsError> {
    check_pair(img, reference)?;
    check_mask(img, mask)?;
    let (sum, count) = region_sum(img, reference, mask, false);
    if count == 0 {
        return Err(MetricsError::EmptyMaskComplement);
    }
    Ok(sum / (count as f64 * img.channels() as f64))
}

/// Per-term breakdown of the composite loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub l2: f64,
    pub l2_eye: f64,
    pub lpips: f64,
    pub sim: f64,
    pub total: f64,
}

/// Weighted sum of plain MSE, eye-masked MSE, and the two plugin terms.
/// Plugin failures propagate.
pub fn composite_loss<P, I>(
    img: &Raster,
    reference: &Raster,
    weights: &LossWeights,
    perceptual: &P,
    identity: &I,
    eye_mask: &Raster,
) -> Result<LossBreakdown, MetricsError>
where
    P: RasterMetric + ?Sized,
    I: RasterMetric + ?Sized,
{
    weights.validate()?;
    let l2 = weights.lambda_l2 * plain_mse(img, reference)?;
    let l2_eye = masked_mse(img, reference, eye_mask, weights.lambda_l2_eye)?;
    let lpips = weights.lambda_lpips * perceptual.evaluate(img, reference)?;
    let sim = weights.lambda_sim * identity.evaluate(img, reference)?;
    Ok(LossBreakdown {
        l2,
        l2_eye,
        lpips,
        sim,
        total: l2 + l2_eye + lpips + sim,
    })
}
