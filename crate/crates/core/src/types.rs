//! Domain value types shared by every module.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// Stereo camera of a rig.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Camera {
    Left,
    Right,
}

impl Camera {
    pub const BOTH: [Camera; 2] = [Camera::Left, Camera::Right];

    pub fn name(self) -> &'static str {
        match self {
            Camera::Left => "left",
            Camera::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Camera> {
        match s {
            "left" => Some(Camera::Left),
            "right" => Some(Camera::Right),
            _ => None,
        }
    }

    pub fn other(self) -> Camera {
        match self {
            Camera::Left => Camera::Right,
            Camera::Right => Camera::Left,
        }
    }
}

impl fmt::Display for Camera {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Position of a frame inside a stereo video collection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameCoord {
    pub scene_id: String,
    pub time_index: u32,
    pub camera: Camera,
}

impl FrameCoord {
    pub fn new(scene_id: impl Into<String>, time_index: u32, camera: Camera) -> Self {
        Self {
            scene_id: scene_id.into(),
            time_index,
            camera,
        }
    }
}

impl Default for FrameCoord {
    fn default() -> Self {
        Self::new("scene", 0, Camera::Left)
    }
}

/// Unclipped interleaved RGB buffer, the working representation between
/// operators. Converting into an [`ImageFrame`] clips to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height * 3],
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Mean over every sample (all channels).
    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }
}

/// RGB frame with samples in `[0, 1]`, tagged with its position in the
/// collection.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    raster: Raster,
    pub coord: FrameCoord,
}

impl ImageFrame {
    /// Builds a frame from raw samples; non-finite or out-of-range samples are
    /// rejected.
    pub fn new(width: usize, height: usize, data: Vec<f32>, coord: FrameCoord) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("frame must be at least 1x1".into()));
        }
        if data.len() != width * height * 3 {
            return Err(Error::SizeMismatch {
                expected: width * height * 3,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
            return Err(Error::InvalidParameter("samples must be finite and in [0,1]".into()));
        }
        Ok(Self {
            raster: Raster {
                width,
                height,
                data,
            },
            coord,
        })
    }

    /// Clips a working raster into a valid frame. NaN maps to 0.
    pub fn from_raster(mut raster: Raster, coord: FrameCoord) -> Self {
        assert!(raster.width > 0 && raster.height > 0, "frame must be at least 1x1");
        for v in raster.data.iter_mut() {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self { raster, coord }
    }

    pub fn width(&self) -> usize {
        self.raster.width
    }

    pub fn height(&self) -> usize {
        self.raster.height
    }

    pub fn dims(&self) -> (usize, usize) {
        self.raster.dims()
    }

    pub fn data(&self) -> &[f32] {
        &self.raster.data
    }

    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    pub fn into_raster(self) -> Raster {
        self.raster
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        self.raster.pixel(x, y)
    }

    pub fn with_coord(mut self, coord: FrameCoord) -> Self {
        self.coord = coord;
        self
    }
}

/// Semantic kind of a dense prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FieldKind {
    /// Optical flow `(u, v)`.
    Flow,
    /// Reference-frame disparity.
    Disparity1,
    /// Target-frame disparity (scene flow).
    Disparity2,
}

impl FieldKind {
    pub fn arity(self) -> usize {
        match self {
            FieldKind::Flow => 2,
            FieldKind::Disparity1 | FieldKind::Disparity2 => 1,
        }
    }
}

/// Dense per-pixel vector field, row-major, `arity` floats per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionField {
    pub width: usize,
    pub height: usize,
    pub kind: FieldKind,
    pub data: Vec<f32>,
}

impl PredictionField {
    pub fn new(width: usize, height: usize, kind: FieldKind, data: Vec<f32>) -> Result<Self> {
        let expected = width * height * kind.arity();
        if data.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("prediction values must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            kind,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, kind: FieldKind) -> Self {
        Self {
            width,
            height,
            kind,
            data: vec![0.0; width * height * kind.arity()],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        kind: FieldKind,
        mut f: impl FnMut(usize, usize) -> [f32; 2],
    ) -> Self {
        let arity = kind.arity();
        let mut data = Vec::with_capacity(width * height * arity);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                data.extend_from_slice(&v[..arity]);
            }
        }
        Self {
            width,
            height,
            kind,
            data,
        }
    }

    pub fn arity(&self) -> usize {
        self.kind.arity()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Vector at a pixel; the second component is 0 for disparities.
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f32; 2] {
        let a = self.arity();
        let i = (y * self.width + x) * a;
        if a == 2 {
            [self.data[i], self.data[i + 1]]
        } else {
            [self.data[i], 0.0]
        }
    }
}

/// Per-pixel metric depth in meters. Invalid pixels hold
/// [`DepthMap::INVALID`] (`+inf`): they are infinitely far away.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl DepthMap {
    pub const INVALID: f32 = f32::INFINITY;

    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::SizeMismatch {
                expected: width * height,
                found: data.len(),
            });
        }
        if data.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidParameter("depth must be non-negative or +inf".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, depth: f32) -> Self {
        Self {
            width,
            height,
            data: vec![depth; width * height],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Depth in meters, `None` for invalid pixels.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f32> {
        let d = self.data[y * self.width + x];
        d.is_finite().then_some(d)
    }

    /// Depth in meters, `+inf` for invalid pixels.
    #[inline]
    pub fn far(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x] as f64
    }
}

/// World-to-camera extrinsic `[R | t]`, row-major 3x4, camera axes x right,
/// y down, z forward.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose(pub [f64; 12]);

impl Pose {
    /// Rectified rig without extrinsics: world y points up, the left camera
    /// sits at the origin and the right camera at `(baseline, 0, 0)`.
    pub fn rectified(camera: Camera, baseline: f64) -> Pose {
        let tx = match camera {
            Camera::Left => 0.0,
            Camera::Right => -baseline,
        };
        Pose([1.0, 0.0, 0.0, tx, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    }

    #[inline]
    pub fn transform(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3],
            m[4] * p[0] + m[5] * p[1] + m[6] * p[2] + m[7],
            m[8] * p[0] + m[9] * p[1] + m[10] * p[2] + m[11],
        ]
    }

    /// Camera-to-world transform (assumes `R` orthonormal).
    pub fn inverse_transform(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        let q = [p[0] - m[3], p[1] - m[7], p[2] - m[11]];
        [
            m[0] * q[0] + m[4] * q[1] + m[8] * q[2],
            m[1] * q[0] + m[5] * q[1] + m[9] * q[2],
            m[2] * q[0] + m[6] * q[1] + m[10] * q[2],
        ]
    }

    /// Right-camera pose from a left pose on a rig with the given baseline.
    pub fn shifted_right(&self, baseline: f64) -> Pose {
        let mut m = self.0;
        m[3] -= baseline;
        Pose(m)
    }
}

/// Stereo rig intrinsics. The principal point defaults to the image center.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CameraRig {
    pub focal_x: f64,
    pub baseline: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub focal_y: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub principal_point: Option<[f64; 2]>,
}

impl CameraRig {
    pub fn new(focal_x: f64, baseline: f64) -> Result<Self> {
        let rig = Self {
            focal_x,
            baseline,
            focal_y: None,
            principal_point: None,
        };
        rig.validate()?;
        Ok(rig)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_x > 0.0 && self.focal_x.is_finite()) {
            return Err(Error::InvalidParameter("focal_x must be > 0".into()));
        }
        if !(self.baseline > 0.0 && self.baseline.is_finite()) {
            return Err(Error::InvalidParameter("baseline must be > 0".into()));
        }
        Ok(())
    }

    pub fn focal_y(&self) -> f64 {
        self.focal_y.unwrap_or(self.focal_x)
    }

    pub fn principal(&self, width: usize, height: usize) -> [f64; 2] {
        self.principal_point
            .unwrap_or([(width as f64 - 1.0) * 0.5, (height as f64 - 1.0) * 0.5])
    }
}

/// Evaluation domain: a row-major bitset of included pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl PixelMask {
    pub fn full(width: usize, height: usize) -> Self {
        let n = width * height;
        let mut bits = vec![0xFF; n.div_ceil(8)];
        if !n.is_multiple_of(8) {
            if let Some(last) = bits.last_mut() {
                *last = (1u8 << (n % 8)) - 1;
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![0; (width * height).div_ceil(8)],
        }
    }

    /// Wraps a raw LSB-first bitset; padding bits past `width*height` must be 0.
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        let n = width * height;
        if bits.len() != n.div_ceil(8) {
            return Err(Error::SizeMismatch {
                expected: n.div_ceil(8),
                found: bits.len(),
            });
        }
        if !n.is_multiple_of(8) && bits[bits.len() - 1] >> (n % 8) != 0 {
            return Err(Error::InvalidParameter("mask padding bits must be zero".into()));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set_index(y * width + x, true);
                }
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn contains_index(&self, i: usize) -> bool {
        self.bits[i >> 3] >> (i & 7) & 1 == 1
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.contains_index(y * self.width + x)
    }

    #[inline]
    pub fn set_index(&mut self, i: usize, on: bool) {
        if on {
            self.bits[i >> 3] |= 1 << (i & 7);
        } else {
            self.bits[i >> 3] &= !(1 << (i & 7));
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn kept_fraction(&self) -> f64 {
        self.count() as f64 / (self.width * self.height) as f64
    }

    /// Included pixel indices in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b != 0).flat_map(|(k, &b)| {
            (0..8).filter(move |j| b >> j & 1 == 1).map(move |j| k * 8 + j)
        })
    }

    pub fn intersect(&self, other: &PixelMask) -> Result<PixelMask> {
        crate::error::check_dims(self.dims(), other.dims())?;
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        Ok(PixelMask {
            width: self.width,
            height: self.height,
            bits,
        })
    }
}
