//! Defocus, glass and zoom blur. Outputs are unclipped.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::filter::{convolve_2d, gaussian_blur, reflect_index, sample_bilinear};
use crate::types::Raster;

/// Equal-weight disk of integer radius `r` (pixels with `dx^2 + dy^2 <= r^2`),
/// embedded in a `size x size` grid.
fn hard_disk(r: usize, size: usize) -> Vec<f32> {
    let c = (size / 2) as isize;
    let r2 = (r * r) as isize;
    let mut k = vec![0.0f32; size * size];
    let mut n = 0usize;
    for y in 0..size {
        for x in 0..size {
            let dx = x as isize - c;
            let dy = y as isize - c;
            if dx * dx + dy * dy <= r2 {
                k[y * size + x] = 1.0;
                n += 1;
            }
        }
    }
    k.iter_mut().for_each(|v| *v /= n as f32);
    k
}

/// Circular mean filter. Fractional radii blend the two neighbouring
/// integer disks linearly, so integer radii give exact equal weights.
pub fn disk_kernel(radius: f64) -> (Vec<f32>, usize) {
    let lo = libm::floor(radius.max(0.0)) as usize;
    let frac = (radius - lo as f64) as f32;
    let size = 2 * (lo + 1) + 1;
    let mut k = hard_disk(lo, size);
    if frac > 0.0 {
        let hi = hard_disk(lo + 1, size);
        for (a, b) in k.iter_mut().zip(hi) {
            *a = (1.0 - frac) * *a + frac * b;
        }
    }
    (k, size)
}

pub fn defocus_blur(img: &Raster, radius: f64) -> Raster {
    if radius <= 0.0 {
        return img.clone();
    }
    let (k, size) = disk_kernel(radius);
    convolve_2d(img, &k, size)
}

/// Gaussian blur followed by `iterations` row-major passes of local pixel
/// swaps. Each pixel swaps with a partner offset by
/// `round(U[-r - 0.5, r + 0.5])` per axis, mirrored at the borders.
pub fn glass_blur<R: Rng>(img: &Raster, sigma: f64, iterations: u32, radius: f64, rng: &mut R) -> Raster {
    let mut out = gaussian_blur(img, sigma);
    if radius <= 0.0 {
        return out;
    }
    let (w, h) = (out.width, out.height);
    let span = radius + 0.5;
    for _ in 0..iterations {
        for y in 0..h {
            for x in 0..w {
                let dx = libm::round(rng.random_range(-span..span)) as isize;
                let dy = libm::round(rng.random_range(-span..span)) as isize;
                let px = reflect_index(x as isize + dx, w);
                let py = reflect_index(y as isize + dy, h);
                let a = (y * w + x) * 3;
                let b = (py * w + px) * 3;
                if a != b {
                    for k in 0..3 {
                        out.data.swap(a + k, b + k);
                    }
                }
            }
        }
    }
    out
}

/// `1, 1 + step, ..., 1 + (n - 1) * step`.
pub fn zoom_schedule(step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + step * i as f64).collect()
}

/// Center zoom by `z` with bilinear sampling.
pub fn zoom(img: &Raster, z: f64) -> Raster {
    if z == 1.0 {
        return img.clone();
    }
    let cx = (img.width as f64 - 1.0) * 0.5;
    let cy = (img.height as f64 - 1.0) * 0.5;
    Raster::from_fn(img.width, img.height, |x, y| {
        sample_bilinear(img, (x as f64 - cx) / z + cx, (y as f64 - cy) / z + cy)
    })
}

/// Average of the image with its zoomed versions, `(I + sum Z(I, z)) / (n + 1)`.
pub fn zoom_blur(img: &Raster, zooms: &[f64]) -> Raster {
    let mut acc: Vec<f64> = img.data.iter().map(|&v| v as f64).collect();
    for &z in zooms {
        let layer = zoom(img, z);
        for (a, v) in acc.iter_mut().zip(&layer.data) {
            *a += *v as f64;
        }
    }
    let n = (zooms.len() + 1) as f64;
    Raster {
        width: img.width,
        height: img.height,
        data: acc.into_iter().map(|v| (v / n) as f32).collect(),
    }
}
