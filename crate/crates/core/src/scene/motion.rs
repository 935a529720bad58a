//! Flow-driven motion blur.

use alloc::format;

use crate::error::{check_dims, Error, Result};
use crate::filter::sample_bilinear;
use crate::types::{FieldKind, PredictionField, Raster};

/// `N = max(1, floor(10 * max |v|))` over the scaled flow.
pub fn sample_count(flow: &PredictionField, scale: f64) -> usize {
    let max = flow
        .data
        .chunks_exact(2)
        .map(|v| libm::hypot(v[0] as f64, v[1] as f64))
        .fold(0.0f64, f64::max);
    (libm::floor(10.0 * max * scale) as usize).max(1)
}

/// Mean of `N + 1` bilinear samples along `k / N * v`, `k = 0..=N`.
pub fn motion_blur(img: &Raster, flow: &PredictionField, scale: f64) -> Result<Raster> {
    if flow.kind != FieldKind::Flow {
        return Err(Error::KindMismatch(format!("motion blur needs flow, got {:?}", flow.kind)));
    }
    check_dims(img.dims(), flow.dims())?;
    let n = sample_count(flow, scale);
    let inv = 1.0 / (n + 1) as f64;
    let mut out = Raster::new(img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            let v = flow.at(x, y);
            let (vx, vy) = (v[0] as f64 * scale, v[1] as f64 * scale);
            let mut acc = [0.0f64; 3];
            for k in 0..=n {
                let s = k as f64 / n as f64;
                let p = sample_bilinear(img, x as f64 + s * vx, y as f64 + s * vy);
                for c in 0..3 {
                    acc[c] += p[c] as f64;
                }
            }
            out.set_pixel(x, y, acc.map(|a| (a * inv) as f32));
        }
    }
    Ok(out)
}
