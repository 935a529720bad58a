//! Metric depth from stereo disparity.

use alloc::format;

use crate::error::{Error, Result};
use crate::types::{CameraRig, DepthMap, FieldKind, PredictionField};

/// Disparities at or below this many pixels yield invalid depth.
pub const MIN_DISPARITY: f32 = 1e-6;

/// `Z = focal_x * baseline / d` per pixel; degenerate disparities become
/// [`DepthMap::INVALID`].
pub fn depth_from_disparity(disp: &PredictionField, rig: &CameraRig) -> Result<DepthMap> {
    if disp.kind != FieldKind::Disparity1 {
        return Err(Error::KindMismatch(format!(
            "depth needs a disparity1 field, got {:?}",
            disp.kind
        )));
    }
    rig.validate()?;
    let fb = rig.focal_x * rig.baseline;
    let data = disp
        .data
        .iter()
        .map(|&d| {
            if d <= MIN_DISPARITY {
                DepthMap::INVALID
            } else {
                (fb / d as f64) as f32
            }
        })
        .collect();
    Ok(DepthMap {
        width: disp.width,
        height: disp.height,
        data,
    })
}
