//! The 20 corruption kinds, their parameter records and the per-frame
//! dispatcher.

pub mod blur;
pub mod color;
pub mod frost;
pub mod noise;
pub mod quality;
pub mod spatter;

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{check_dims, Error, Result};
use crate::scene::{self, FogParams, PoseTrack, WeatherParams};
use crate::seed::{self, SeedContext};
use crate::types::{CameraRig, DepthMap, FrameCoord, ImageFrame, PredictionField, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CorruptionKind {
    Brightness,
    Contrast,
    Saturate,
    DefocusBlur,
    GaussianBlur,
    GlassBlur,
    MotionBlur,
    ZoomBlur,
    GaussianNoise,
    ImpulseNoise,
    SpeckleNoise,
    ShotNoise,
    Pixelate,
    Jpeg,
    Elastic,
    Spatter,
    Frost,
    Snow,
    Rain,
    Fog,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 20] = [
        CorruptionKind::Brightness,
        CorruptionKind::Contrast,
        CorruptionKind::Saturate,
        CorruptionKind::DefocusBlur,
        CorruptionKind::GaussianBlur,
        CorruptionKind::GlassBlur,
        CorruptionKind::MotionBlur,
        CorruptionKind::ZoomBlur,
        CorruptionKind::GaussianNoise,
        CorruptionKind::ImpulseNoise,
        CorruptionKind::SpeckleNoise,
        CorruptionKind::ShotNoise,
        CorruptionKind::Pixelate,
        CorruptionKind::Jpeg,
        CorruptionKind::Elastic,
        CorruptionKind::Spatter,
        CorruptionKind::Frost,
        CorruptionKind::Snow,
        CorruptionKind::Rain,
        CorruptionKind::Fog,
    ];

    pub fn name(self) -> &'static str {
        use CorruptionKind::*;
        match self {
            Brightness => "brightness",
            Contrast => "contrast",
            Saturate => "saturate",
            DefocusBlur => "defocus_blur",
            GaussianBlur => "gaussian_blur",
            GlassBlur => "glass_blur",
            MotionBlur => "motion_blur",
            ZoomBlur => "zoom_blur",
            GaussianNoise => "gaussian_noise",
            ImpulseNoise => "impulse_noise",
            SpeckleNoise => "speckle_noise",
            ShotNoise => "shot_noise",
            Pixelate => "pixelate",
            Jpeg => "jpeg",
            Elastic => "elastic",
            Spatter => "spatter",
            Frost => "frost",
            Snow => "snow",
            Rain => "rain",
            Fog => "fog",
        }
    }

    pub fn parse(s: &str) -> Option<CorruptionKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Reference consistency pattern of the kind.
    pub fn consistency(self) -> Consistency {
        use CorruptionKind::*;
        let (time, stereo, depth) = match self {
            Brightness | Contrast | Saturate | DefocusBlur | GaussianBlur | ZoomBlur | Pixelate
            | Jpeg => (true, true, false),
            GlassBlur | Elastic | Spatter | Frost => (true, false, false),
            MotionBlur => (true, false, true),
            GaussianNoise | ImpulseNoise | SpeckleNoise | ShotNoise => (false, false, false),
            Snow | Rain | Fog => (true, true, true),
        };
        Consistency {
            time,
            stereo,
            depth,
        }
    }

    pub fn is_noise(self) -> bool {
        use CorruptionKind::*;
        matches!(self, GaussianNoise | ImpulseNoise | SpeckleNoise | ShotNoise)
    }

    /// Default mean-SSIM severity target.
    pub fn target_ssim(self) -> f64 {
        if self.is_noise() {
            0.2
        } else {
            0.7
        }
    }

    pub fn needs_depth(self) -> bool {
        matches!(self, CorruptionKind::Fog | CorruptionKind::Snow | CorruptionKind::Rain)
    }

    pub fn needs_flow(self) -> bool {
        self == CorruptionKind::MotionBlur
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which axes a corruption's realized parameters are shared along, and
/// whether it uses scene depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Consistency {
    pub time: bool,
    pub stereo: bool,
    pub depth: bool,
}

/// Parameter record of one corruption.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Params {
    Brightness { c: f64 },
    Contrast { c: f64 },
    Saturate { alpha: f64, beta: f64 },
    DefocusBlur { radius: f64 },
    GaussianBlur { sigma: f64 },
    GlassBlur { sigma: f64, iterations: u32, radius: f64 },
    /// `scale` multiplies the input flow.
    MotionBlur { scale: f64 },
    ZoomBlur { zooms: Vec<f64> },
    GaussianNoise { alpha: f64 },
    ImpulseNoise { p: f64 },
    SpeckleNoise { alpha: f64 },
    /// `c = inf` disables the noise.
    ShotNoise { c: f64 },
    Pixelate { fraction: f64 },
    Jpeg { quality: u8 },
    Elastic { alpha: f64, sigma: f64, keyframe_interval: u32 },
    Spatter(spatter::SpatterParams),
    Frost { weight: f64 },
    Snow(WeatherParams),
    Rain(WeatherParams),
    Fog(FogParams),
}

impl Params {
    /// Reference severity of each kind.
    pub fn default_for(kind: CorruptionKind) -> Params {
        use CorruptionKind as K;
        match kind {
            K::Brightness => Params::Brightness { c: 0.39 },
            K::Contrast => Params::Contrast { c: 0.16 },
            K::Saturate => Params::Saturate { alpha: 2.3, beta: 0.01 },
            K::DefocusBlur => Params::DefocusBlur { radius: 6.0 },
            K::GaussianBlur => Params::GaussianBlur { sigma: 4.0 },
            K::GlassBlur => Params::GlassBlur {
                sigma: 1.2,
                iterations: 1,
                radius: 3.0,
            },
            K::MotionBlur => Params::MotionBlur { scale: 1.0 },
            K::ZoomBlur => Params::ZoomBlur {
                zooms: blur::zoom_schedule(0.02, 13),
            },
            K::GaussianNoise => Params::GaussianNoise { alpha: 0.115 },
            K::ImpulseNoise => Params::ImpulseNoise { p: 0.075 },
            K::SpeckleNoise => Params::SpeckleNoise { alpha: 0.45 },
            K::ShotNoise => Params::ShotNoise { c: 23.0 },
            K::Pixelate => Params::Pixelate { fraction: 0.16 },
            K::Jpeg => Params::Jpeg { quality: 6 },
            K::Elastic => Params::Elastic {
                alpha: 110.0,
                sigma: 5.0,
                keyframe_interval: 10,
            },
            K::Spatter => Params::Spatter(spatter::SpatterParams::default()),
            K::Frost => Params::Frost {
                weight: frost::DEFAULT_WEIGHT,
            },
            K::Snow => Params::Snow(WeatherParams::snow()),
            K::Rain => Params::Rain(WeatherParams::rain()),
            K::Fog => Params::Fog(FogParams::default()),
        }
    }

    pub fn kind(&self) -> CorruptionKind {
        use CorruptionKind as K;
        match self {
            Params::Brightness { .. } => K::Brightness,
            Params::Contrast { .. } => K::Contrast,
            Params::Saturate { .. } => K::Saturate,
            Params::DefocusBlur { .. } => K::DefocusBlur,
            Params::GaussianBlur { .. } => K::GaussianBlur,
            Params::GlassBlur { .. } => K::GlassBlur,
            Params::MotionBlur { .. } => K::MotionBlur,
            Params::ZoomBlur { .. } => K::ZoomBlur,
            Params::GaussianNoise { .. } => K::GaussianNoise,
            Params::ImpulseNoise { .. } => K::ImpulseNoise,
            Params::SpeckleNoise { .. } => K::SpeckleNoise,
            Params::ShotNoise { .. } => K::ShotNoise,
            Params::Pixelate { .. } => K::Pixelate,
            Params::Jpeg { .. } => K::Jpeg,
            Params::Elastic { .. } => K::Elastic,
            Params::Spatter(_) => K::Spatter,
            Params::Frost { .. } => K::Frost,
            Params::Snow(_) => K::Snow,
            Params::Rain(_) => K::Rain,
            Params::Fog(_) => K::Fog,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, what: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(what.to_string()))
            }
        }
        let fin = |v: f64| v.is_finite();
        match self {
            Params::Brightness { c } => check(fin(*c), "brightness c must be finite"),
            Params::Contrast { c } => check(fin(*c) && *c >= 0.0, "contrast c must be >= 0"),
            Params::Saturate { alpha, beta } => check(
                fin(*alpha) && fin(*beta) && *alpha >= 0.0,
                "saturate alpha must be >= 0 and beta finite",
            ),
            Params::DefocusBlur { radius } => check(fin(*radius) && *radius >= 0.0, "defocus radius must be >= 0"),
            Params::GaussianBlur { sigma } => check(fin(*sigma) && *sigma >= 0.0, "blur sigma must be >= 0"),
            Params::GlassBlur { sigma, radius, .. } => check(
                fin(*sigma) && *sigma >= 0.0 && fin(*radius) && *radius >= 0.0,
                "glass blur sigma and radius must be >= 0",
            ),
            Params::MotionBlur { scale } => check(fin(*scale) && *scale >= 0.0, "motion blur scale must be >= 0"),
            Params::ZoomBlur { zooms } => check(
                !zooms.is_empty() && zooms.iter().all(|z| fin(*z) && *z >= 1.0),
                "zoom schedule must be non-empty with factors >= 1",
            ),
            Params::GaussianNoise { alpha } | Params::SpeckleNoise { alpha } => {
                check(fin(*alpha) && *alpha >= 0.0, "noise alpha must be >= 0")
            }
            Params::ImpulseNoise { p } => check((0.0..=1.0).contains(p), "impulse p must be in [0,1]"),
            Params::ShotNoise { c } => check(*c > 0.0, "shot noise c must be > 0"),
            Params::Pixelate { fraction } => check(
                *fraction > 0.0 && *fraction <= 1.0,
                "pixelate fraction must be in (0,1]",
            ),
            Params::Jpeg { quality } => check((1..=100).contains(quality), "jpeg quality must be in 1..=100"),
            Params::Elastic {
                alpha,
                sigma,
                keyframe_interval,
            } => check(
                fin(*alpha) && *alpha >= 0.0 && fin(*sigma) && *sigma >= 0.0 && *keyframe_interval >= 1,
                "elastic alpha, sigma must be >= 0 and keyframe interval >= 1",
            ),
            Params::Spatter(p) => p.validate(),
            Params::Frost { weight } => check((0.0..=1.0).contains(weight), "frost weight must be in [0,1]"),
            Params::Snow(w) | Params::Rain(w) => w.validate(),
            Params::Fog(f) => f.validate(),
        }
    }
}

/// A corruption kind with its parameters, consistency flags and master seed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorruptionSpec {
    pub params: Params,
    pub consistency: Consistency,
    pub master_seed: u64,
    /// Allows flags that differ from the kind's reference pattern.
    #[cfg_attr(feature = "serde", serde(default))]
    pub override_consistency: bool,
}

impl CorruptionSpec {
    pub fn new(params: Params, master_seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            consistency: params.kind().consistency(),
            params,
            master_seed,
            override_consistency: false,
        })
    }

    pub fn default_for(kind: CorruptionKind, master_seed: u64) -> Self {
        Self::new(Params::default_for(kind), master_seed).expect("reference parameters are valid")
    }

    /// Opts out of the reference consistency pattern.
    pub fn with_consistency_override(mut self, consistency: Consistency) -> Self {
        self.consistency = consistency;
        self.override_consistency = true;
        self
    }

    pub fn kind(&self) -> CorruptionKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.override_consistency && self.consistency != self.kind().consistency() {
            return Err(Error::InvalidParameter(format!(
                "consistency flags for {} differ from its reference pattern; set override_consistency",
                self.kind()
            )));
        }
        Ok(())
    }

    pub fn seed_context(&self, coord: &FrameCoord) -> SeedContext {
        SeedContext::new(self.master_seed, coord, self.kind())
    }

    pub fn stream_seed(&self, coord: &FrameCoord) -> u64 {
        self.seed_context(coord).stream_seed(self.consistency)
    }
}

/// What was realized for one output frame.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub coord: FrameCoord,
    pub params: Params,
    pub consistency: Consistency,
    pub stream_seed: u64,
    /// Fingerprint of the auxiliary pattern shared between frames (droplet
    /// layer, frost crop, particle simulation).
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub pattern: Option<u64>,
}

impl Provenance {
    pub fn kind(&self) -> CorruptionKind {
        self.params.kind()
    }

    /// True when both records realize the same parameters and patterns.
    pub fn same_realization(&self, other: &Provenance) -> bool {
        self.params == other.params
            && self.consistency == other.consistency
            && self.stream_seed == other.stream_seed
            && self.pattern == other.pattern
    }
}

/// Scene inputs some corruptions need besides the frame itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrameAux<'a> {
    pub depth: Option<&'a DepthMap>,
    pub flow: Option<&'a PredictionField>,
    pub rig: Option<&'a CameraRig>,
    pub poses: Option<&'a PoseTrack>,
    /// Frost textures; empty selects the built-in procedural set.
    pub frost_textures: &'a [Raster],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corrupted {
    pub frame: ImageFrame,
    pub provenance: Provenance,
}

fn require<'a, T>(v: Option<&'a T>, what: &str, coord: &FrameCoord, kind: CorruptionKind) -> Result<&'a T> {
    v.ok_or_else(|| {
        Error::MissingInput(format!(
            "{kind} needs {what} for frame {}/{}/{}",
            coord.scene_id, coord.camera, coord.time_index
        ))
    })
}

/// Corrupts one frame. The result is clipped to `[0, 1]` once, here.
pub fn apply(frame: &ImageFrame, spec: &CorruptionSpec, aux: &FrameAux<'_>) -> Result<Corrupted> {
    let (raster, provenance) = apply_unclipped(frame, spec, aux)?;
    Ok(Corrupted {
        frame: ImageFrame::from_raster(raster, frame.coord.clone()),
        provenance,
    })
}

/// Like [`apply`] but returns the working raster before clipping.
pub fn apply_unclipped(frame: &ImageFrame, spec: &CorruptionSpec, aux: &FrameAux<'_>) -> Result<(Raster, Provenance)> {
    spec.validate()?;
    let coord = &frame.coord;
    let kind = spec.kind();
    let stream_seed = spec.stream_seed(coord);
    let img = frame.raster();
    let mut pattern = None;
    let out = match &spec.params {
        Params::Brightness { c } => color::brightness(img, *c),
        Params::Contrast { c } => color::contrast(img, *c),
        Params::Saturate { alpha, beta } => color::saturate(img, *alpha, *beta),
        Params::DefocusBlur { radius } => blur::defocus_blur(img, *radius),
        Params::GaussianBlur { sigma } => crate::filter::gaussian_blur(img, *sigma),
        Params::GlassBlur {
            sigma,
            iterations,
            radius,
        } => blur::glass_blur(img, *sigma, *iterations, *radius, &mut seed::rng(stream_seed)),
        Params::MotionBlur { scale } => {
            let flow = require(aux.flow, "a flow field", coord, kind)?;
            check_dims(img.dims(), flow.dims())?;
            scene::motion_blur(img, flow, *scale)?
        }
        Params::ZoomBlur { zooms } => blur::zoom_blur(img, zooms),
        Params::GaussianNoise { alpha } => noise::gaussian_noise(img, *alpha, &mut seed::rng(stream_seed)),
        Params::ImpulseNoise { p } => noise::impulse_noise(img, *p, &mut seed::rng(stream_seed)),
        Params::SpeckleNoise { alpha } => noise::speckle_noise(img, *alpha, &mut seed::rng(stream_seed)),
        Params::ShotNoise { c } => noise::shot_noise(img, *c, &mut seed::rng(stream_seed)),
        Params::Pixelate { fraction } => quality::pixelate(img, *fraction),
        Params::Jpeg { quality } => quality::jpeg(img, *quality)?,
        Params::Elastic {
            alpha,
            sigma,
            keyframe_interval,
        } => quality::elastic(img, *alpha, *sigma, *keyframe_interval, stream_seed, coord.time_index),
        Params::Spatter(p) => {
            let layer = spatter::droplet_mask(img.width, img.height, p, stream_seed);
            pattern = Some(seed::fingerprint(layer.bits().iter().map(|&b| b as u64)));
            spatter::spatter(img, &layer, p)
        }
        Params::Frost { weight } => {
            let builtin;
            let textures = if aux.frost_textures.is_empty() {
                builtin = frost::builtin_textures();
                &builtin[..]
            } else {
                aux.frost_textures
            };
            let (overlay, choice) = frost::overlay(img.width, img.height, textures, stream_seed)?;
            pattern = Some(choice.fingerprint());
            frost::frost(img, &overlay, *weight)
        }
        Params::Fog(p) => {
            let depth = require(aux.depth, "a depth map", coord, kind)?;
            scene::fog(img, depth, p)?
        }
        Params::Snow(w) | Params::Rain(w) => {
            let depth = require(aux.depth, "a depth map", coord, kind)?;
            let rig = require(aux.rig, "camera intrinsics", coord, kind)?;
            let sim = scene::WeatherSim::new(kind, w, rig, img.width, img.height, aux.poses, stream_seed)?;
            pattern = Some(sim.fingerprint());
            scene::render_weather_frame(&sim, img, depth, coord)?
        }
    };
    Ok((
        out,
        Provenance {
            coord: coord.clone(),
            params: spec.params.clone(),
            consistency: spec.consistency,
            stream_seed,
            pattern,
        },
    ))
}

/// Kinds whose reference consistency pattern satisfies `pred`.
pub fn kinds_with(pred: impl Fn(Consistency) -> bool) -> Vec<CorruptionKind> {
    CorruptionKind::ALL
        .into_iter()
        .filter(|k| pred(k.consistency()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_consistency_pattern() {
        use CorruptionKind::*;
        let row = |k: CorruptionKind| {
            let c = k.consistency();
            (c.time, c.stereo, c.depth)
        };
        assert_eq!(row(Brightness), (true, true, false));
        assert_eq!(row(GlassBlur), (true, false, false));
        assert_eq!(row(MotionBlur), (true, false, true));
        assert_eq!(row(ShotNoise), (false, false, false));
        assert_eq!(row(Snow), (true, true, true));
        assert_eq!(kinds_with(|c| c.depth).len(), 4);
        assert_eq!(kinds_with(|c| !c.time).len(), 4);
        assert_eq!(kinds_with(|c| c.stereo).len(), 11);
    }

    #[test]
    fn names_round_trip() {
        for k in CorruptionKind::ALL {
            assert_eq!(CorruptionKind::parse(k.name()), Some(k));
            assert_eq!(Params::default_for(k).kind(), k);
            assert!(Params::default_for(k).validate().is_ok(), "{k}");
        }
        assert_eq!(CorruptionKind::parse("hail"), None);
    }

    #[test]
    fn constructor_enforces_flags() {
        let mut s = CorruptionSpec::default_for(CorruptionKind::GlassBlur, 1);
        assert!(s.validate().is_ok());
        s.consistency.stereo = true;
        assert!(s.validate().is_err());
        let s = s.clone().with_consistency_override(s.consistency);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn jpeg_quality_range() {
        assert!(CorruptionSpec::new(Params::Jpeg { quality: 0 }, 0).is_err());
        assert!(CorruptionSpec::new(Params::Jpeg { quality: 101 }, 0).is_err());
        assert!(CorruptionSpec::new(Params::Jpeg { quality: 1 }, 0).is_ok());
    }

    #[test]
    fn missing_depth_names_the_frame() {
        let f = ImageFrame::from_raster(Raster::new(4, 4), FrameCoord::new("s1", 3, crate::types::Camera::Right));
        let spec = CorruptionSpec::default_for(CorruptionKind::Fog, 0);
        let err = apply(&f, &spec, &FrameAux::default()).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("s1/right/3"), "{msg}");
    }

    #[test]
    fn empty_vec_is_rejected_by_zoom() {
        assert!(Params::ZoomBlur { zooms: alloc::vec![] }.validate().is_err());
    }
}
