//! Deterministic stratified evaluation masks.
//!
//! A frame's `N = width * height` pixels are ordered along the Hilbert curve
//! of the smallest enclosing power-of-two square, skipping positions outside
//! the frame, and cut into consecutive cells of `n = ceil(1 / fraction)`
//! pixels (the last cell may be shorter). Runs of a Hilbert curve are
//! compact patches, so the cells stratify both image axes. One pixel per
//! cell is kept, drawn uniformly from the cell by a stream keyed on
//! `(seed, frame key)`. The kept count is therefore `ceil(N / n)`: 1037 for
//! 1920x1080 at 0.0005, and never zero.
//!
//! Hero frames are stratified at `HERO_THINNING * fraction` and the
//! selections of all hero frames are then thinned together: they are
//! shuffled by a seeded stream and every `HERO_THINNING`-th one is kept.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::{derive, fingerprint, fnv1a64, rng};
use crate::types::{FrameCoord, PixelMask};

/// Fold of the global hero-frame thinning.
pub const HERO_THINNING: usize = 20;

const HERO_TAG: u64 = 0x4845_524F_5448_494E;

/// Stable key of a frame for mask seeding.
pub fn frame_key(coord: &FrameCoord) -> u64 {
    fingerprint([
        fnv1a64(coord.scene_id.as_bytes()),
        coord.camera as u64,
        coord.time_index as u64,
    ])
}

/// Cell length for a kept fraction.
pub fn cell_size(fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "subsampling fraction must be in (0, 1], got {fraction}"
        )));
    }
    // The small slack keeps exact reciprocals such as 1/0.0005 from
    // rounding up to the next integer.
    Ok(libm::ceil(1.0 / fraction - 1e-9).max(1.0) as usize)
}

/// Number of pixels `make_mask` keeps.
pub fn kept_count(width: usize, height: usize, fraction: f64) -> Result<usize> {
    Ok((width * height).div_ceil(cell_size(fraction)?))
}

/// Point `d` of the Hilbert curve filling a `2^order` square.
fn hilbert_point(order: u32, mut d: u64) -> (u64, u64) {
    let (mut x, mut y) = (0u64, 0u64);
    let mut s = 1u64;
    while s < (1u64 << order) {
        let rx = 1 & (d / 2);
        let ry = 1 & (d ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            core::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        d /= 4;
        s *= 2;
    }
    (x, y)
}

/// Row-major indices of every pixel of a `width x height` frame in Hilbert
/// curve order.
pub fn curve_order(width: usize, height: usize) -> Vec<u32> {
    let side = width.max(height).max(1).next_power_of_two() as u64;
    let order = side.trailing_zeros();
    // Aligned blocks are contiguous stretches of the curve, so blocks
    // outside the frame are skipped whole.
    let block_bits = order.min(5);
    let block_len = 1u64 << (2 * block_bits);
    let mut out = Vec::with_capacity(width * height);
    for block in 0..(side * side) / block_len {
        let first = block * block_len;
        let (bx, by) = hilbert_point(order, first);
        let mask = !((1u64 << block_bits) - 1);
        if (bx & mask) >= width as u64 || (by & mask) >= height as u64 {
            continue;
        }
        for d in first..first + block_len {
            let (x, y) = hilbert_point(order, d);
            if x < width as u64 && y < height as u64 {
                out.push((y * width as u64 + x) as u32);
            }
        }
    }
    out
}

fn mask_on_curve(curve: &[u32], width: usize, height: usize, fraction: f64, seed: u64, frame_key: u64) -> Result<PixelMask> {
    let n = cell_size(fraction)?;
    let mut mask = PixelMask::empty(width, height);
    let mut r = rng(derive(seed, frame_key));
    for cell in curve.chunks(n) {
        let pick = if cell.len() == 1 { 0 } else { r.random_range(0..cell.len()) };
        mask.set_index(cell[pick] as usize, true);
    }
    Ok(mask)
}

fn check_frame(width: usize, height: usize) -> Result<()> {
    if width * height == 0 {
        return Err(Error::InvalidParameter("cannot subsample an empty frame".into()));
    }
    if width * height > u32::MAX as usize {
        return Err(Error::InvalidParameter(alloc::format!("frame of {width}x{height} pixels is too large to subsample")));
    }
    Ok(())
}

pub fn make_mask(width: usize, height: usize, fraction: f64, seed: u64, frame_key: u64) -> Result<PixelMask> {
    cell_size(fraction)?;
    check_frame(width, height)?;
    mask_on_curve(&curve_order(width, height), width, height, fraction, seed, frame_key)
}

/// Frame description for [`make_masks`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskRequest {
    pub width: usize,
    pub height: usize,
    pub key: u64,
    pub hero: bool,
}

/// Masks for a set of frames, in request order.
pub fn make_masks(requests: &[MaskRequest], fraction: f64, seed: u64) -> Result<Vec<PixelMask>> {
    cell_size(fraction)?;
    let hero_fraction = (fraction * HERO_THINNING as f64).min(1.0);
    let mut masks = Vec::with_capacity(requests.len());
    let mut hero_pixels: Vec<(usize, usize)> = Vec::new();
    let mut curve: ((usize, usize), Vec<u32>) = ((0, 0), Vec::new());
    for (i, q) in requests.iter().enumerate() {
        check_frame(q.width, q.height)?;
        if curve.0 != (q.width, q.height) {
            curve = ((q.width, q.height), curve_order(q.width, q.height));
        }
        if q.hero {
            let m = mask_on_curve(&curve.1, q.width, q.height, hero_fraction, seed, q.key)?;
            hero_pixels.extend(m.indices().map(|p| (i, p)));
            masks.push(PixelMask::empty(q.width, q.height));
        } else {
            masks.push(mask_on_curve(&curve.1, q.width, q.height, fraction, seed, q.key)?);
        }
    }
    let mut r = rng(derive(seed, HERO_TAG));
    hero_pixels.shuffle(&mut r);
    for &(i, p) in hero_pixels.iter().step_by(HERO_THINNING) {
        masks[i].set_index(p, true);
    }
    Ok(masks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Camera;
    use proptest::prelude::*;

    #[test]
    fn full_hd_count() {
        let m = make_mask(1920, 1080, 0.0005, 7, 11).unwrap();
        assert_eq!(m.count(), 1037);
        assert_eq!(kept_count(1920, 1080, 0.0005).unwrap(), 1037);
    }

    #[test]
    fn fraction_one_is_full() {
        assert_eq!(make_mask(13, 7, 1.0, 1, 2).unwrap(), PixelMask::full(13, 7));
    }

    #[test]
    fn tiny_frame_keeps_one() {
        assert_eq!(make_mask(3, 2, 0.0005, 1, 2).unwrap().count(), 1);
    }

    #[test]
    fn rejects_bad_fraction() {
        for f in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(make_mask(4, 4, f, 0, 0).is_err());
        }
    }

    #[test]
    fn one_pixel_per_cell() {
        let m = make_mask(37, 11, 0.1, 3, 4).unwrap();
        let curve = curve_order(37, 11);
        let mut per_cell = alloc::vec![0; curve.len().div_ceil(10)];
        for (pos, &p) in curve.iter().enumerate() {
            if m.contains(p as usize % 37, p as usize / 37) {
                per_cell[pos / 10] += 1;
            }
        }
        assert!(per_cell.iter().all(|&c| c == 1), "{per_cell:?}");
    }

    #[test]
    fn curve_on_a_power_of_two_square_steps_to_neighbours() {
        let curve = curve_order(16, 16);
        for w in curve.windows(2) {
            let (a, b) = (w[0] as i64, w[1] as i64);
            let (dx, dy) = ((a % 16 - b % 16).abs(), (a / 16 - b / 16).abs());
            assert_eq!(dx + dy, 1);
        }
    }

    #[test]
    fn cells_are_compact_on_full_hd() {
        // Each 2000-pixel cell fits in a small box rather than a pixel row.
        let curve = curve_order(1920, 1080);
        let mut widest = 0;
        for cell in curve.chunks(2000) {
            let xs = cell.iter().map(|&p| p as usize % 1920);
            let (lo, hi) = xs.fold((usize::MAX, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
            widest = widest.max(hi - lo);
        }
        assert!(widest < 200, "{widest}");
    }

    #[test]
    fn frames_differ_and_repeat() {
        let a = FrameCoord::new("s", 0, Camera::Left);
        let b = FrameCoord::new("s", 0, Camera::Right);
        let ka = frame_key(&a);
        assert_ne!(ka, frame_key(&b));
        assert_eq!(make_mask(64, 48, 0.01, 5, ka).unwrap(), make_mask(64, 48, 0.01, 5, ka).unwrap());
        assert_ne!(make_mask(64, 48, 0.01, 5, ka).unwrap(), make_mask(64, 48, 0.01, 5, frame_key(&b)).unwrap());
    }

    #[test]
    fn hero_frames_are_thinned_globally() {
        let reqs: Vec<MaskRequest> = (0..4)
            .map(|k| MaskRequest {
                width: 400,
                height: 300,
                key: k,
                hero: k >= 2,
            })
            .collect();
        let masks = make_masks(&reqs, 0.001, 9).unwrap();
        assert_eq!(masks[0], make_mask(400, 300, 0.001, 9, 0).unwrap());
        let hero_sel = 2 * kept_count(400, 300, 0.02).unwrap();
        let hero_kept = masks[2].count() + masks[3].count();
        assert_eq!(hero_kept, hero_sel.div_ceil(HERO_THINNING));
        // Thinned hero masks are subsets of their stratified selection.
        let full = make_mask(400, 300, 0.02, 9, 2).unwrap();
        assert_eq!(masks[2].intersect(&full).unwrap(), masks[2]);
        assert_eq!(make_masks(&reqs, 0.001, 9).unwrap(), masks);
    }

    proptest! {
        #[test]
        fn curve_is_a_permutation(w in 1usize..70, h in 1usize..70) {
            let mut c = curve_order(w, h);
            c.sort_unstable();
            prop_assert!(c.iter().enumerate().all(|(i, &p)| p as usize == i));
            prop_assert_eq!(c.len(), w * h);
        }

        #[test]
        fn count_follows_rounding_rule(w in 1usize..300, h in 1usize..200, f in 0.0001f64..=1.0, seed in any::<u64>()) {
            let m = make_mask(w, h, f, seed, 0).unwrap();
            prop_assert_eq!(m.count(), kept_count(w, h, f).unwrap());
            prop_assert!(m.count() >= 1);
        }
    }
}
