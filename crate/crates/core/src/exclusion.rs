//! Robustness after excluding pixels the corruption visibly changed.
//!
//! Per pixel, `d = max_c |I_c - I^c_c|`. At threshold `t` in `[0, 100]` a
//! pixel is excluded iff `d > 1 - t / 100`, so 0 excludes nothing and 100
//! excludes every pixel with any difference. EPE is recomputed on the
//! remaining pixels.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_dims, Error, Result};
use crate::metrics::{robustness, MetricKind};
use crate::types::{PixelMask, PredictionField, Raster};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExclusionPoint {
    pub threshold: f64,
    /// Percentage of pixels of the base mask that were excluded.
    pub excluded_percent: f64,
    /// `None` when every pixel was excluded.
    pub epe: Option<f64>,
}

/// Per-pixel max-channel absolute difference.
pub fn difference_map(clean: &Raster, corrupt: &Raster) -> Result<Vec<f32>> {
    check_dims(clean.dims(), corrupt.dims())?;
    Ok(clean
        .data
        .chunks_exact(3)
        .zip(corrupt.data.chunks_exact(3))
        .map(|(a, b)| (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0f32, f32::max))
        .collect())
}

/// Mask of pixels kept at `threshold`.
pub fn kept_mask(diff: &[f32], width: usize, height: usize, threshold: f64) -> Result<PixelMask> {
    if !(0.0..=100.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!("threshold must be in [0, 100], got {threshold}")));
    }
    if diff.len() != width * height {
        return Err(Error::SizeMismatch {
            expected: width * height,
            found: diff.len(),
        });
    }
    let cut = 1.0 - threshold / 100.0;
    let mut m = PixelMask::empty(width, height);
    for (i, &d) in diff.iter().enumerate() {
        m.set_index(i, f64::from(d) <= cut);
    }
    Ok(m)
}

pub fn exclusion_analysis(
    clean_img: &Raster,
    corrupt_img: &Raster,
    clean_pred: &PredictionField,
    corrupt_pred: &PredictionField,
    base: &PixelMask,
    thresholds: &[f64],
) -> Result<Vec<ExclusionPoint>> {
    let diff = difference_map(clean_img, corrupt_img)?;
    check_dims(clean_img.dims(), clean_pred.dims())?;
    check_dims(clean_img.dims(), base.dims())?;
    let total = base.count();
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    thresholds
        .iter()
        .map(|&t| {
            let kept = kept_mask(&diff, clean_img.width, clean_img.height, t)?.intersect(base)?;
            let n = kept.count();
            let epe = if n == 0 {
                None
            } else {
                Some(robustness(clean_pred, corrupt_pred, &kept, MetricKind::Epe)?)
            };
            Ok(ExclusionPoint {
                threshold: t,
                excluded_percent: 100.0 * (total - n) as f64 / total as f64,
                epe,
            })
        })
        .collect()
}
