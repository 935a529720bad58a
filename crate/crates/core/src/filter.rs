//! Convolution, resampling and border handling.
//!
//! All borders use mirror reflection about the edge sample (`d c b | a b c d`).

use alloc::vec;
use alloc::vec::Vec;

use crate::types::Raster;

/// Mirror an integer index into `[0, n)`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut m = i.rem_euclid(period);
    if m >= n as isize {
        m = period - m;
    }
    m as usize
}

/// Mirror a continuous coordinate into `[0, n-1]`.
#[inline]
pub fn reflect_coord(x: f64, n: usize) -> f64 {
    if n == 1 {
        return 0.0;
    }
    let last = (n - 1) as f64;
    let period = 2.0 * last;
    let mut m = x - period * libm::floor(x / period);
    if m > last {
        m = period - m;
    }
    m.clamp(0.0, last)
}

/// Normalized sampled Gaussian with radius `ceil(3 sigma)`. `sigma <= 0`
/// yields the identity kernel.
pub fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let radius = libm::ceil(3.0 * sigma) as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let s: f64 = k.iter().sum();
    for v in k.iter_mut() {
        *v /= s;
    }
    k.into_iter().map(|v| v as f32).collect()
}

/// Separable convolution of one scalar plane.
pub fn convolve_plane(plane: &[f32], width: usize, height: usize, kx: &[f32], ky: &[f32]) -> Vec<f32> {
    let rx = (kx.len() / 2) as isize;
    let ry = (ky.len() / 2) as isize;
    let mut tmp = vec![0.0f32; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0f32;
            for (k, &w) in kx.iter().enumerate() {
                acc += w * row[reflect_index(x as isize + k as isize - rx, width)];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0f32; plane.len()];
    for y in 0..height {
        for (k, &w) in ky.iter().enumerate() {
            let sy = reflect_index(y as isize + k as isize - ry, height);
            let src = &tmp[sy * width..(sy + 1) * width];
            let dst = &mut out[y * width..(y + 1) * width];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    }
    out
}

pub fn split_channels(r: &Raster) -> [Vec<f32>; 3] {
    let n = r.width * r.height;
    let mut planes = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for p in r.data.chunks_exact(3) {
        planes[0].push(p[0]);
        planes[1].push(p[1]);
        planes[2].push(p[2]);
    }
    planes
}

pub fn merge_channels(width: usize, height: usize, planes: &[Vec<f32>; 3]) -> Raster {
    let n = width * height;
    let mut data = Vec::with_capacity(n * 3);
    for ((r, g), b) in planes[0].iter().zip(&planes[1]).zip(&planes[2]).take(n) {
        data.extend_from_slice(&[*r, *g, *b]);
    }
    Raster {
        width,
        height,
        data,
    }
}

pub fn convolve_separable(r: &Raster, kx: &[f32], ky: &[f32]) -> Raster {
    let planes = split_channels(r);
    let out = [
        convolve_plane(&planes[0], r.width, r.height, kx, ky),
        convolve_plane(&planes[1], r.width, r.height, kx, ky),
        convolve_plane(&planes[2], r.width, r.height, kx, ky),
    ];
    merge_channels(r.width, r.height, &out)
}

pub fn gaussian_blur(r: &Raster, sigma: f64) -> Raster {
    let k = gaussian_kernel(sigma);
    if k.len() == 1 {
        return r.clone();
    }
    convolve_separable(r, &k, &k)
}

/// Dense 2D convolution with a square odd-sized kernel.
pub fn convolve_2d(r: &Raster, kernel: &[f32], size: usize) -> Raster {
    debug_assert_eq!(kernel.len(), size * size);
    let rad = (size / 2) as isize;
    let taps: Vec<(isize, isize, f32)> = (0..size)
        .flat_map(|ky| (0..size).map(move |kx| (kx, ky)))
        .filter_map(|(kx, ky)| {
            let w = kernel[ky * size + kx];
            (w != 0.0).then_some((kx as isize - rad, ky as isize - rad, w))
        })
        .collect();
    let mut out = Raster::new(r.width, r.height);
    for y in 0..r.height {
        for x in 0..r.width {
            let mut acc = [0.0f32; 3];
            for &(dx, dy, w) in &taps {
                let sx = reflect_index(x as isize + dx, r.width);
                let sy = reflect_index(y as isize + dy, r.height);
                let i = (sy * r.width + sx) * 3;
                acc[0] += w * r.data[i];
                acc[1] += w * r.data[i + 1];
                acc[2] += w * r.data[i + 2];
            }
            out.set_pixel(x, y, acc);
        }
    }
    out
}

/// Bilinear sample at a continuous position with mirrored borders.
#[inline]
pub fn sample_bilinear(r: &Raster, x: f64, y: f64) -> [f32; 3] {
    let x = reflect_coord(x, r.width);
    let y = reflect_coord(y, r.height);
    let x0 = libm::floor(x) as usize;
    let y0 = libm::floor(y) as usize;
    let x1 = (x0 + 1).min(r.width - 1);
    let y1 = (y0 + 1).min(r.height - 1);
    let fx = (x - x0 as f64) as f32;
    let fy = (y - y0 as f64) as f32;
    let a = r.pixel(x0, y0);
    let b = r.pixel(x1, y0);
    let c = r.pixel(x0, y1);
    let d = r.pixel(x1, y1);
    let mut out = [0.0f32; 3];
    for k in 0..3 {
        let top = a[k] + (b[k] - a[k]) * fx;
        let bot = c[k] + (d[k] - c[k]) * fx;
        out[k] = top + (bot - top) * fy;
    }
    out
}

/// Bilinear sample of a scalar plane with mirrored borders.
#[inline]
pub fn sample_plane_bilinear(plane: &[f32], width: usize, height: usize, x: f64, y: f64) -> f32 {
    let x = reflect_coord(x, width);
    let y = reflect_coord(y, height);
    let x0 = libm::floor(x) as usize;
    let y0 = libm::floor(y) as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = (x - x0 as f64) as f32;
    let fy = (y - y0 as f64) as f32;
    let top = plane[y0 * width + x0] + (plane[y0 * width + x1] - plane[y0 * width + x0]) * fx;
    let bot = plane[y1 * width + x0] + (plane[y1 * width + x1] - plane[y1 * width + x0]) * fx;
    top + (bot - top) * fy
}

/// Area weights for reducing `src` samples to `dst` samples: each output
/// sample averages the exact source interval it covers.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f32)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|j| {
            let a = j as f64 * scale;
            let b = (j + 1) as f64 * scale;
            let mut taps = Vec::new();
            let mut i = libm::floor(a) as usize;
            while (i as f64) < b && i < src {
                let lo = a.max(i as f64);
                let hi = b.min((i + 1) as f64);
                if hi > lo {
                    taps.push((i, ((hi - lo) / scale) as f32));
                }
                i += 1;
            }
            taps
        })
        .collect()
}

/// Exact box-filter (area) downsample.
pub fn box_downsample(r: &Raster, dst_w: usize, dst_h: usize) -> Raster {
    let wx = box_weights(r.width, dst_w);
    let wy = box_weights(r.height, dst_h);
    let mut tmp = vec![0.0f32; dst_w * r.height * 3];
    for y in 0..r.height {
        for (x, taps) in wx.iter().enumerate() {
            let mut acc = [0.0f32; 3];
            for &(sx, w) in taps {
                let p = r.pixel(sx, y);
                for k in 0..3 {
                    acc[k] += w * p[k];
                }
            }
            tmp[(y * dst_w + x) * 3..(y * dst_w + x) * 3 + 3].copy_from_slice(&acc);
        }
    }
    let mut out = Raster::new(dst_w, dst_h);
    for (y, taps) in wy.iter().enumerate() {
        for x in 0..dst_w {
            let mut acc = [0.0f32; 3];
            for &(sy, w) in taps {
                let i = (sy * dst_w + x) * 3;
                for k in 0..3 {
                    acc[k] += w * tmp[i + k];
                }
            }
            out.set_pixel(x, y, acc);
        }
    }
    out
}

/// Center-anchored bilinear resize (edge-clamped).
pub fn bilinear_resize(r: &Raster, dst_w: usize, dst_h: usize) -> Raster {
    let sx = r.width as f64 / dst_w as f64;
    let sy = r.height as f64 / dst_h as f64;
    Raster::from_fn(dst_w, dst_h, |x, y| {
        let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (r.width - 1) as f64);
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (r.height - 1) as f64);
        sample_bilinear(r, fx, fy)
    })
}
