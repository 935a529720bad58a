//! Frost overlay: `w * I + (1 - w) * T` with a texture crop chosen once per
//! stream seed.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::filter::{gaussian_blur, sample_bilinear};
use crate::seed;
use crate::types::Raster;

pub const DEFAULT_WEIGHT: f64 = 0.6;
pub const BUILTIN_SIZE: usize = 256;

/// Which texture and which crop of it a stream uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrostChoice {
    pub texture: usize,
    pub crop: [f64; 4],
}

impl FrostChoice {
    pub fn fingerprint(&self) -> u64 {
        seed::fingerprint(
            core::iter::once(self.texture as u64).chain(self.crop.iter().map(|v| v.to_bits())),
        )
    }
}

fn value_noise(size: usize, cells: usize, rng: &mut impl Rng) -> Vec<f32> {
    let g = cells + 1;
    let grid: Vec<f32> = (0..g * g).map(|_| rng.random::<f32>()).collect();
    let mut out = vec![0.0f32; size * size];
    let step = cells as f32 / size as f32;
    for y in 0..size {
        let fy = y as f32 * step;
        let (y0, ty) = (fy as usize, fy - libm::floorf(fy));
        let sy = ty * ty * (3.0 - 2.0 * ty);
        for x in 0..size {
            let fx = x as f32 * step;
            let (x0, tx) = (fx as usize, fx - libm::floorf(fx));
            let sx = tx * tx * (3.0 - 2.0 * tx);
            let a = grid[y0 * g + x0];
            let b = grid[y0 * g + x0 + 1];
            let c = grid[(y0 + 1) * g + x0];
            let d = grid[(y0 + 1) * g + x0 + 1];
            let top = a + (b - a) * sx;
            let bot = c + (d - c) * sx;
            out[y * size + x] = top + (bot - top) * sy;
        }
    }
    out
}

/// Crystalline texture: fractal value noise plus branching ice needles.
pub fn procedural_texture(index: usize, size: usize) -> Raster {
    let mut rng = seed::rng(seed::derive(0xF405_7000, index as u64));
    let mut base = vec![0.0f32; size * size];
    let mut amp = 0.5f32;
    for octave in 0..5 {
        let layer = value_noise(size, 4 << octave, &mut rng);
        for (b, l) in base.iter_mut().zip(layer) {
            *b += amp * l;
        }
        amp *= 0.5;
    }
    let mut needles = vec![0.0f32; size * size];
    let count = 60 + 40 * index;
    for _ in 0..count {
        let mut x = rng.random::<f32>() * size as f32;
        let mut y = rng.random::<f32>() * size as f32;
        let mut angle = rng.random::<f32>() * core::f32::consts::TAU;
        let len = 10 + rng.random_range(0..size / 4);
        let bright = 0.3 + 0.7 * rng.random::<f32>();
        for _ in 0..len {
            let (xi, yi) = (x as isize, y as isize);
            if xi >= 0 && yi >= 0 && (xi as usize) < size && (yi as usize) < size {
                let i = yi as usize * size + xi as usize;
                needles[i] = needles[i].max(bright);
            }
            angle += (rng.random::<f32>() - 0.5) * 0.25;
            x += libm::cosf(angle);
            y += libm::sinf(angle);
        }
    }
    let needles = gaussian_blur(
        &Raster {
            width: size,
            height: size,
            data: needles.iter().flat_map(|&v| [v; 3]).collect(),
        },
        0.8,
    );
    Raster::from_fn(size, size, |x, y| {
        let i = y * size + x;
        let v = (0.45 + 0.45 * base[i] + 0.8 * needles.data[i * 3]).min(1.0);
        [0.86 * v, 0.93 * v, v]
    })
}

pub fn builtin_textures() -> Vec<Raster> {
    (0..3).map(|i| procedural_texture(i, BUILTIN_SIZE)).collect()
}

/// Picks a texture and a crop with the frame's aspect ratio covering
/// 50-100% of the texture, and resamples it to the frame size.
pub fn overlay(width: usize, height: usize, textures: &[Raster], stream_seed: u64) -> Result<(Raster, FrostChoice)> {
    if textures.is_empty() {
        return Err(Error::MissingInput("no frost textures".into()));
    }
    let mut rng = seed::rng(stream_seed);
    let texture = rng.random_range(0..textures.len());
    let t = &textures[texture];
    let aspect = width as f64 / height as f64;
    let full_w = (t.width as f64).min(t.height as f64 * aspect);
    let scale = 0.5 + 0.5 * rng.random::<f64>();
    let cw = full_w * scale;
    let ch = cw / aspect;
    let ox = rng.random::<f64>() * (t.width as f64 - cw);
    let oy = rng.random::<f64>() * (t.height as f64 - ch);
    let sx = cw / width as f64;
    let sy = ch / height as f64;
    let out = Raster::from_fn(width, height, |x, y| {
        sample_bilinear(t, ox + (x as f64 + 0.5) * sx - 0.5, oy + (y as f64 + 0.5) * sy - 0.5)
    });
    Ok((
        out,
        FrostChoice {
            texture,
            crop: [ox, oy, cw, ch],
        },
    ))
}

pub fn frost(img: &Raster, overlay: &Raster, weight: f64) -> Raster {
    let w = weight as f32;
    Raster {
        width: img.width,
        height: img.height,
        data: img
            .data
            .iter()
            .zip(&overlay.data)
            .map(|(i, t)| w * i + (1.0 - w) * t)
            .collect(),
    }
}
