#![no_std]
//! Corruption synthesis and robustness evaluation for dense matching on
//! stereo video.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calibration;
pub mod color;
pub mod corruption;
pub mod depth;
pub mod error;
pub mod exclusion;
pub mod filter;
pub mod format;
pub mod metrics;
pub mod pipeline;
pub mod ranking;
pub mod scene;
pub mod seed;
pub mod ssim;
pub mod subsample;
pub mod synthetic;
pub mod types;

pub use corruption::{apply, Consistency, Corrupted, CorruptionKind, CorruptionSpec, FrameAux, Params, Provenance};
pub use depth::depth_from_disparity;
pub use error::{Error, Result};
pub use seed::SeedContext;
pub use ssim::ssim;
pub use types::{Camera, CameraRig, DepthMap, FieldKind, FrameCoord, ImageFrame, PixelMask, Pose, PredictionField, Raster};
