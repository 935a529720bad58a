//! Per-sample noise models. Every call draws fresh noise from the given
//! stream. Outputs are unclipped.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::types::Raster;

/// `I + alpha * N(0, 1)` per sample.
pub fn gaussian_noise<R: Rng>(img: &Raster, alpha: f64, rng: &mut R) -> Raster {
    let mut out = img.clone();
    if alpha == 0.0 {
        return out;
    }
    for v in out.data.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *v = (*v as f64 + alpha * n) as f32;
    }
    out
}

/// Replaces each pixel with probability `p` by black or white (equally
/// likely).
pub fn impulse_noise<R: Rng>(img: &Raster, p: f64, rng: &mut R) -> Raster {
    let mut out = img.clone();
    if p <= 0.0 {
        return out;
    }
    for px in out.data.chunks_exact_mut(3) {
        if rng.random::<f64>() < p {
            let v = if rng.random::<bool>() { 1.0 } else { 0.0 };
            px.fill(v);
        }
    }
    out
}

/// `I + I * alpha * N(0, 1)` per sample.
pub fn speckle_noise<R: Rng>(img: &Raster, alpha: f64, rng: &mut R) -> Raster {
    let mut out = img.clone();
    if alpha == 0.0 {
        return out;
    }
    for v in out.data.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        let i = *v as f64;
        *v = (i + i * alpha * n) as f32;
    }
    out
}

/// `Poisson(I * c) / c` per sample; infinite `c` is the identity.
pub fn shot_noise<R: Rng>(img: &Raster, c: f64, rng: &mut R) -> Raster {
    let mut out = img.clone();
    if c.is_infinite() {
        return out;
    }
    for v in out.data.iter_mut() {
        let lambda = *v as f64 * c;
        *v = if lambda > 0.0 {
            let k: f64 = Poisson::new(lambda).expect("finite positive rate").sample(rng);
            (k / c) as f32
        } else {
            0.0
        };
    }
    out
}
