//! Brightness, contrast and saturation. Outputs are unclipped.

use crate::color::{hsv_to_rgb, rgb_to_hsv};
use crate::types::Raster;

/// `I + c` on every sample.
pub fn brightness(img: &Raster, c: f64) -> Raster {
    let c = c as f32;
    Raster {
        width: img.width,
        height: img.height,
        data: img.data.iter().map(|v| v + c).collect(),
    }
}

/// Per-channel means.
pub fn channel_means(img: &Raster) -> [f64; 3] {
    let mut s = [0.0f64; 3];
    for p in img.data.chunks_exact(3) {
        for k in 0..3 {
            s[k] += p[k] as f64;
        }
    }
    let n = (img.width * img.height).max(1) as f64;
    s.map(|v| v / n)
}

/// `(I - mean) * c + mean`, with the mean taken per channel.
pub fn contrast(img: &Raster, c: f64) -> Raster {
    let m = channel_means(img);
    let mut out = img.clone();
    for p in out.data.chunks_exact_mut(3) {
        for k in 0..3 {
            p[k] = ((p[k] as f64 - m[k]) * c + m[k]) as f32;
        }
    }
    out
}

/// Saturation after `S * alpha + beta`, clipped to `[0, 1]`.
#[inline]
pub fn scaled_saturation(s: f32, alpha: f64, beta: f64) -> f32 {
    ((s as f64 * alpha + beta) as f32).clamp(0.0, 1.0)
}

/// `S * alpha + beta` in HSV; hue and value are untouched.
pub fn saturate(img: &Raster, alpha: f64, beta: f64) -> Raster {
    let mut out = img.clone();
    for p in out.data.chunks_exact_mut(3) {
        let [h, s, v] = rgb_to_hsv([p[0], p[1], p[2]]);
        let rgb = hsv_to_rgb([h, scaled_saturation(s, alpha, beta), v]);
        p.copy_from_slice(&rgb);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn gray(values: &[f32]) -> Raster {
        Raster {
            width: values.len(),
            height: 1,
            data: values.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    #[test]
    fn brightness_adds_constant() {
        let out = brightness(&Raster::filled(3, 2, [0.2; 3]), 0.39);
        assert!(out.data.iter().all(|v| (v - 0.59).abs() < 1e-6));
        let clipped = crate::types::ImageFrame::from_raster(brightness(&gray(&[0.9]), 0.39), Default::default());
        assert_eq!(clipped.data(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn contrast_two_pixels() {
        let out = contrast(&gray(&[0.0, 1.0]), 0.16);
        assert!((out.data[0] - 0.42).abs() < 1e-6);
        assert!((out.data[3] - 0.58).abs() < 1e-6);
        let c = Raster::filled(4, 4, [0.3, 0.6, 0.9]);
        assert_eq!(contrast(&c, 0.16).data, c.data);
    }

    #[test]
    fn saturate_gray_and_red() {
        let out = saturate(&gray(&[0.5]), 2.3, 0.01);
        let [_, s, v] = rgb_to_hsv(out.pixel(0, 0));
        assert!((s - 0.01).abs() < 1e-6);
        assert!((v - 0.5).abs() < 1e-6);
        let red = Raster {
            width: 1,
            height: 1,
            data: vec![1.0, 0.0, 0.0],
        };
        assert_eq!(saturate(&red, 2.3, 0.01).data, vec![1.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn contrast_preserves_mean(px in proptest::collection::vec(0.0f32..=1.0, 3..60), c in 0.0f64..2.0) {
            let n = px.len() / 3;
            let r = Raster { width: n, height: 1, data: px[..n * 3].to_vec() };
            prop_assert!((contrast(&r, c).mean() - r.mean()).abs() < 1e-5);
        }

        #[test]
        fn saturate_keeps_hue(r in 0.0f32..=1.0, g in 0.0f32..=1.0, b in 0.0f32..=1.0) {
            let img = Raster { width: 1, height: 1, data: vec![r, g, b] };
            let before = rgb_to_hsv([r, g, b]);
            let after = rgb_to_hsv(saturate(&img, 2.3, 0.01).pixel(0, 0));
            // Hue is only defined when the input has chroma.
            if before[1] > 1e-3 {
                let d = (before[0] - after[0]).abs();
                prop_assert!(d.min(1.0 - d) < 1e-4, "{before:?} {after:?}");
            }
        }
    }
}
