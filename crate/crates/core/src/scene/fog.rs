//! Koschmieder fog.

use crate::error::{check_dims, Error, Result};
use crate::types::{DepthMap, Raster};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FogParams {
    /// Visibility range `d_m` in meters; `+inf` disables the fog.
    pub visibility: f64,
    /// Sky luminance `l`.
    pub luminance: f64,
}

impl Default for FogParams {
    fn default() -> Self {
        Self {
            visibility: 45.0,
            luminance: 0.8,
        }
    }
}

impl FogParams {
    pub fn validate(&self) -> Result<()> {
        if self.visibility.is_nan() || self.visibility <= 0.0 || !(0.0..=1.0).contains(&self.luminance) {
            return Err(Error::InvalidParameter(
                "fog needs visibility > 0 and luminance in [0,1]".into(),
            ));
        }
        Ok(())
    }
}

/// `exp(-D ln 20 / d_m)`; infinite depth gives 0.
#[inline]
pub fn transmission(depth: f64, visibility: f64) -> f64 {
    if visibility.is_infinite() {
        return 1.0;
    }
    libm::exp(-depth * libm::log(20.0) / visibility)
}

/// `I * t + l * (1 - t)` per pixel with `t = transmission(D)`.
pub fn fog(img: &Raster, depth: &DepthMap, p: &FogParams) -> Result<Raster> {
    check_dims(img.dims(), depth.dims())?;
    p.validate()?;
    let mut out = img.clone();
    for (i, px) in out.data.chunks_exact_mut(3).enumerate() {
        let t = transmission(depth.data[i] as f64, p.visibility);
        let sky = p.luminance * (1.0 - t);
        for v in px.iter_mut() {
            *v = (*v as f64 * t + sky) as f32;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn img() -> Raster {
        Raster::from_fn(5, 4, |x, y| [x as f32 / 4.0, y as f32 / 3.0, 0.37])
    }

    #[test]
    fn zero_depth_is_identity() {
        let i = img();
        assert_eq!(fog(&i, &DepthMap::constant(5, 4, 0.0), &FogParams::default()).unwrap(), i);
    }

    #[test]
    fn visibility_depth_closed_form() {
        let i = img();
        let out = fog(&i, &DepthMap::constant(5, 4, 45.0), &FogParams::default()).unwrap();
        for (a, b) in out.data.iter().zip(&i.data) {
            assert!((*a as f64 - (0.05 * *b as f64 + 0.76)).abs() < 1e-6);
        }
    }

    #[test]
    fn infinite_depth_is_sky() {
        let out = fog(&img(), &DepthMap::constant(5, 4, DepthMap::INVALID), &FogParams::default()).unwrap();
        assert!(out.data.iter().all(|&v| (v - 0.8).abs() < 1e-7));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(fog(&img(), &DepthMap::constant(4, 4, 1.0), &FogParams::default()).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_depth(i in 0.0f32..=1.0, d0 in 0.0f32..200.0, dd in 0.0f32..50.0) {
            let r = Raster::filled(1, 1, [i; 3]);
            let p = FogParams::default();
            let a = fog(&r, &DepthMap::constant(1, 1, d0), &p).unwrap().data[0];
            let b = fog(&r, &DepthMap::constant(1, 1, d0 + dd), &p).unwrap().data[0];
            if (i as f64) < p.luminance { prop_assert!(b >= a); }
            if (i as f64) > p.luminance { prop_assert!(b <= a); }
        }
    }
}
