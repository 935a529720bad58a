//! Liquid droplets: a thresholded, blurred noise layer alpha-blended with a
//! droplet color.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::filter::{convolve_plane, gaussian_kernel};
use crate::seed;
use crate::types::{PixelMask, Raster};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpatterParams {
    /// Std of the liquid layer around its 0.5 mean.
    pub noise_sigma: f64,
    pub blur_sigma: f64,
    pub threshold: f64,
    pub color: [f64; 3],
    pub opacity: f64,
}

impl Default for SpatterParams {
    fn default() -> Self {
        Self {
            noise_sigma: 0.8,
            blur_sigma: 3.0,
            threshold: 0.65,
            color: [0.35, 0.45, 0.55],
            opacity: 0.6,
        }
    }
}

impl SpatterParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.noise_sigma >= 0.0
            && self.noise_sigma.is_finite()
            && self.blur_sigma >= 0.0
            && self.blur_sigma.is_finite()
            && self.threshold.is_finite()
            && self.color.iter().all(|c| (0.0..=1.0).contains(c))
            && (0.0..=1.0).contains(&self.opacity);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "spatter needs sigmas >= 0, finite threshold, color and opacity in [0,1]".into(),
            ))
        }
    }
}

/// Liquid layer `0.5 + noise_sigma * z`, where `z` is white Gaussian noise
/// blurred by `blur_sigma` and rescaled to unit variance.
pub fn liquid_layer(width: usize, height: usize, p: &SpatterParams, seed: u64) -> Vec<f32> {
    let mut rng = seed::rng(seed);
    let noise: Vec<f32> = (0..width * height)
        .map(|_| {
            let n: f64 = StandardNormal.sample(&mut rng);
            n as f32
        })
        .collect();
    let k = gaussian_kernel(p.blur_sigma);
    let blurred = convolve_plane(&noise, width, height, &k, &k);
    let norm: f64 = k.iter().map(|&v| (v as f64) * (v as f64)).sum();
    let scale = p.noise_sigma / norm;
    blurred.into_iter().map(|z| (0.5 + scale * z as f64) as f32).collect()
}

/// Pixels whose liquid layer exceeds the threshold.
pub fn droplet_mask(width: usize, height: usize, p: &SpatterParams, seed: u64) -> PixelMask {
    let layer = liquid_layer(width, height, p, seed);
    let t = p.threshold as f32;
    PixelMask::from_fn(width, height, |x, y| layer[y * width + x] > t)
}

pub fn spatter(img: &Raster, mask: &PixelMask, p: &SpatterParams) -> Raster {
    let a = p.opacity as f32;
    let c = p.color.map(|v| v as f32);
    let mut out = img.clone();
    for (i, px) in out.data.chunks_exact_mut(3).enumerate() {
        if mask.contains_index(i) {
            for k in 0..3 {
                px[k] = (1.0 - a) * px[k] + a * c[k];
            }
        }
    }
    out
}
