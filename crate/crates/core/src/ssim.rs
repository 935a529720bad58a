//! Single-scale structural similarity on luma.
//!
//! Local statistics use an 11x11 Gaussian window (sigma 1.5) evaluated only
//! at positions where the whole window fits inside the image; the score is
//! the mean of the SSIM map over those positions. Images smaller than the
//! window shrink it to the largest odd size that fits.

use alloc::vec;
use alloc::vec::Vec;

use crate::color::luma_plane;
use crate::error::{check_dims, Result};
use crate::types::{ImageFrame, Raster};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

impl SsimConfig {
    fn window_for(&self, width: usize, height: usize) -> Vec<f64> {
        let mut size = self.window.min(width).min(height);
        if size.is_multiple_of(2) {
            size -= 1;
        }
        let r = (size / 2) as isize;
        let mut k: Vec<f64> = (-r..=r)
            .map(|i| libm::exp(-((i * i) as f64) / (2.0 * self.sigma * self.sigma)))
            .collect();
        let s: f64 = k.iter().sum();
        k.iter_mut().for_each(|v| *v /= s);
        k
    }
}

/// SSIM between two frames of equal size.
pub fn ssim(a: &ImageFrame, b: &ImageFrame) -> Result<f64> {
    ssim_raster(a.raster(), b.raster())
}

pub fn ssim_raster(a: &Raster, b: &Raster) -> Result<f64> {
    check_dims(a.dims(), b.dims())?;
    Ok(ssim_plane(
        &luma_plane(a),
        &luma_plane(b),
        a.width,
        a.height,
        &SsimConfig::default(),
    ))
}

/// Valid-mode separable filtering of a plane.
fn filter_valid(plane: &[f64], width: usize, height: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = k.len();
    let ow = width + 1 - n;
    let oh = height + 1 - n;
    let mut tmp = vec![0.0; ow * height];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(w, v)| w * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for (j, w) in k.iter().enumerate() {
            let src = &tmp[(y + j) * ow..(y + j + 1) * ow];
            for (d, s) in out[y * ow..(y + 1) * ow].iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    (out, ow, oh)
}

/// SSIM of two scalar planes.
pub fn ssim_plane(a: &[f64], b: &[f64], width: usize, height: usize, cfg: &SsimConfig) -> f64 {
    let k = cfg.window_for(width, height);
    let c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    let c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

    let aa: Vec<f64> = a.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = b.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();

    let (mu_a, _, _) = filter_valid(a, width, height, &k);
    let (mu_b, _, _) = filter_valid(b, width, height, &k);
    let (e_aa, _, _) = filter_valid(&aa, width, height, &k);
    let (e_bb, _, _) = filter_valid(&bb, width, height, &k);
    let (e_ab, ow, oh) = filter_valid(&ab, width, height, &k);

    let mut total = 0.0;
    for i in 0..ow * oh {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    total / (ow * oh) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::gaussian_blur;
    use crate::types::FrameCoord;
    use proptest::prelude::*;

    /// Textbook SSIM: explicit 2D window sums at every valid position.
    #[allow(clippy::needless_range_loop)]
    fn oracle(a: &[f64], b: &[f64], w: usize, h: usize) -> f64 {
        let r = 5isize;
        let mut win = [[0.0f64; 11]; 11];
        let mut s = 0.0;
        for (j, row) in win.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                let dx = i as f64 - 5.0;
                let dy = j as f64 - 5.0;
                *v = (-(dx * dx + dy * dy) / 4.5).exp();
                s += *v;
            }
        }
        let (c1, c2) = (1e-4, 9e-4);
        let mut total = 0.0;
        let mut count = 0;
        for cy in r..h as isize - r {
            for cx in r..w as isize - r {
                let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for j in 0..11 {
                    for i in 0..11 {
                        let wgt = win[j][i] / s;
                        let idx = (cy - r + j as isize) as usize * w + (cx - r + i as isize) as usize;
                        ma += wgt * a[idx];
                        mb += wgt * b[idx];
                    }
                }
                for j in 0..11 {
                    for i in 0..11 {
                        let wgt = win[j][i] / s;
                        let idx = (cy - r + j as isize) as usize * w + (cx - r + i as isize) as usize;
                        saa += wgt * (a[idx] - ma) * (a[idx] - ma);
                        sbb += wgt * (b[idx] - mb) * (b[idx] - mb);
                        sab += wgt * (a[idx] - ma) * (b[idx] - mb);
                    }
                }
                total += ((2.0 * ma * mb + c1) * (2.0 * sab + c2))
                    / ((ma * ma + mb * mb + c1) * (saa + sbb + c2));
                count += 1;
            }
        }
        total / count as f64
    }

    fn gray(w: usize, h: usize, f: impl Fn(usize, usize) -> f32) -> Raster {
        Raster::from_fn(w, h, |x, y| {
            let v = f(x, y);
            [v, v, v]
        })
    }

    /// 64x64 reference pattern shared with the external oracle.
    fn reference_64() -> Raster {
        gray(64, 64, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let checker = if (x / 8 + y / 8) % 2 == 0 { 0.25 } else { -0.25 };
            (0.5 + checker * 0.8 + 0.15 * (xf * 0.37).sin() * (yf * 0.23).cos()) as f32
        })
    }

    #[test]
    fn identical_is_one() {
        let r = reference_64();
        assert!((ssim_raster(&r, &r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverted_binary_is_negative() {
        let a = gray(32, 32, |x, y| if (x / 4 + y / 4) % 2 == 0 { 1.0 } else { 0.0 });
        let b = gray(32, 32, |x, y| if (x / 4 + y / 4) % 2 == 0 { 0.0 } else { 1.0 });
        assert!(ssim_raster(&a, &b).unwrap() < 0.0);
    }

    #[test]
    fn blurred_reference_matches_external_oracle() {
        // Frozen with scikit-image structural_similarity (gaussian_weights,
        // sigma 1.5, population covariance, data_range 1) on the same
        // pattern blurred by scipy gaussian_filter(sigma 4, mode "mirror",
        // truncate 3).
        let a = reference_64();
        let b = gaussian_blur(&a, 4.0);
        let v = ssim_raster(&a, &b).unwrap();
        assert!((v - EXTERNAL_SSIM_BLUR4).abs() < 1e-4, "{v}");
    }

    const EXTERNAL_SSIM_BLUR4: f64 = 0.161_236_039_223_094_18;

    #[test]
    fn matches_textbook_definition() {
        let a = reference_64();
        let b = gaussian_blur(&a, 1.3);
        let la = luma_plane(&a);
        let lb = luma_plane(&b);
        let fast = ssim_plane(&la, &lb, 64, 64, &SsimConfig::default());
        assert!((fast - oracle(&la, &lb, 64, 64)).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = ImageFrame::from_raster(Raster::new(4, 4), FrameCoord::default());
        let b = ImageFrame::from_raster(Raster::new(4, 5), FrameCoord::default());
        assert!(ssim(&a, &b).is_err());
    }

    #[test]
    fn tiny_images_shrink_window() {
        let a = gray(3, 5, |x, y| (x * y) as f32 / 8.0);
        let b = gray(3, 5, |x, _| x as f32 / 2.0);
        let v = ssim_raster(&a, &b).unwrap();
        assert!(v.is_finite() && (-1.0..=1.0).contains(&v));
    }

    proptest! {
        #[test]
        fn symmetric(seed in 0u64..1000) {
            let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
            let mut next = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s >> 40) as f32 / (1u64 << 24) as f32 };
            let a = Raster::from_fn(16, 13, |_, _| [next(), next(), next()]);
            let b = Raster::from_fn(16, 13, |_, _| [next(), next(), next()]);
            let ab = ssim_raster(&a, &b).unwrap();
            let ba = ssim_raster(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
