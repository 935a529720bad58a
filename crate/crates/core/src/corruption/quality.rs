//! Pixelation, JPEG compression and elastic warping. Outputs are unclipped.

use alloc::format;
use alloc::vec::Vec;

use jpeg_encoder::{ColorType, Encoder, SamplingFactor};
use rand::Rng;
use zune_core::bytestream::ZCursor;
use zune_jpeg::JpegDecoder;

use crate::error::{Error, Result};
use crate::filter::{bilinear_resize, box_downsample, convolve_plane, gaussian_kernel, sample_bilinear};
use crate::seed;
use crate::types::Raster;

/// Box-downsample to `fraction` of each side, then bilinear upsample back.
pub fn pixelate(img: &Raster, fraction: f64) -> Raster {
    let dw = (libm::round(img.width as f64 * fraction) as usize).clamp(1, img.width);
    let dh = (libm::round(img.height as f64 * fraction) as usize).clamp(1, img.height);
    if (dw, dh) == img.dims() {
        return img.clone();
    }
    bilinear_resize(&box_downsample(img, dw, dh), img.width, img.height)
}

fn to_bytes(img: &Raster) -> Vec<u8> {
    img.data
        .iter()
        .map(|v| libm::roundf(v.clamp(0.0, 1.0) * 255.0) as u8)
        .collect()
}

/// Baseline JPEG stream at IJG quality `quality`, 4:2:0 chroma.
pub fn jpeg_bytes(img: &Raster, quality: u8) -> Result<Vec<u8>> {
    let (w, h) = (img.width, img.height);
    if w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(Error::Jpeg(format!("{w}x{h} exceeds the JPEG size limit")));
    }
    let mut buf = Vec::new();
    let mut enc = Encoder::new(&mut buf, quality);
    enc.set_sampling_factor(SamplingFactor::R_4_2_0);
    enc.encode(&to_bytes(img), w as u16, h as u16, ColorType::Rgb)
        .map_err(|e| Error::Jpeg(format!("{e:?}")))?;
    Ok(buf)
}

pub fn decode_jpeg(bytes: &[u8], width: usize, height: usize) -> Result<Raster> {
    let mut dec = JpegDecoder::new(ZCursor::new(bytes));
    let px = dec.decode().map_err(|e| Error::Jpeg(format!("{e:?}")))?;
    if px.len() != width * height * 3 {
        return Err(Error::Jpeg(format!(
            "decoded {} samples, expected {}",
            px.len(),
            width * height * 3
        )));
    }
    Ok(Raster {
        width,
        height,
        data: px.into_iter().map(|v| v as f32 / 255.0).collect(),
    })
}

/// JPEG encode-decode round trip.
pub fn jpeg(img: &Raster, quality: u8) -> Result<Raster> {
    decode_jpeg(&jpeg_bytes(img, quality)?, img.width, img.height)
}

/// Displacement field `(dx, dy)` in pixels.
pub struct Displacement {
    pub dx: Vec<f32>,
    pub dy: Vec<f32>,
}

impl Displacement {
    pub fn magnitude(&self, i: usize) -> f32 {
        libm::hypotf(self.dx[i], self.dy[i])
    }
}

/// Keyframe field: per-pixel vectors uniform in the unit disk, smoothed
/// with a Gaussian of `sigma` and scaled by `alpha`.
fn keyframe(width: usize, height: usize, alpha: f64, sigma: f64, seed: u64) -> Displacement {
    let mut rng = seed::rng(seed);
    let n = width * height;
    let mut dx = Vec::with_capacity(n);
    let mut dy = Vec::with_capacity(n);
    for _ in 0..n {
        let r = libm::sqrt(rng.random::<f64>());
        let t = core::f64::consts::TAU * rng.random::<f64>();
        dx.push((r * libm::cos(t)) as f32);
        dy.push((r * libm::sin(t)) as f32);
    }
    let k = gaussian_kernel(sigma);
    let a = alpha as f32;
    let smooth = |p: Vec<f32>| -> Vec<f32> {
        convolve_plane(&p, width, height, &k, &k)
            .into_iter()
            .map(|v| v * a)
            .collect()
    };
    Displacement {
        dx: smooth(dx),
        dy: smooth(dy),
    }
}

/// Field at `time_index`: linear blend of the surrounding keyframes, which
/// sit every `interval` frames.
pub fn elastic_field(
    width: usize,
    height: usize,
    alpha: f64,
    sigma: f64,
    interval: u32,
    seed: u64,
    time_index: u32,
) -> Displacement {
    let interval = interval.max(1);
    let k = time_index / interval;
    let f = (time_index % interval) as f32 / interval as f32;
    let a = keyframe(width, height, alpha, sigma, seed::derive(seed, k as u64));
    if f == 0.0 {
        return a;
    }
    let b = keyframe(width, height, alpha, sigma, seed::derive(seed, k as u64 + 1));
    let lerp = |x: &[f32], y: &[f32]| x.iter().zip(y).map(|(p, q)| (1.0 - f) * p + f * q).collect();
    Displacement {
        dx: lerp(&a.dx, &b.dx),
        dy: lerp(&a.dy, &b.dy),
    }
}

/// Bilinear backward warp `I(x + dx, y + dy)`.
pub fn warp(img: &Raster, field: &Displacement) -> Raster {
    Raster::from_fn(img.width, img.height, |x, y| {
        let i = y * img.width + x;
        sample_bilinear(img, x as f64 + field.dx[i] as f64, y as f64 + field.dy[i] as f64)
    })
}

pub fn elastic(img: &Raster, alpha: f64, sigma: f64, interval: u32, seed: u64, time_index: u32) -> Raster {
    if alpha == 0.0 {
        return img.clone();
    }
    warp(img, &elastic_field(img.width, img.height, alpha, sigma, interval, seed, time_index))
}
