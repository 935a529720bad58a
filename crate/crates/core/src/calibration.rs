//! Severity calibration: one scalar knob per kind, tuned by bisection until
//! the mean SSIM against the clean frames reaches a target.
//!
//! Knob mapping (`θ = 0` is the identity for every kind except JPEG, where it
//! means quality 100):
//!
//! | kind | parameters at `θ` | `θ` of the reference setting | `θ_max` |
//! |---|---|---|---|
//! | brightness | `c = θ` | 0.39 | 1 |
//! | contrast | `c = 1 - θ` | 0.84 | 1 |
//! | saturate | `α = 1 + 1.3θ`, `β = 0.01θ` | 1 | 40 |
//! | defocus_blur | `r = θ` | 6 | 30 |
//! | gaussian_blur | `σ = θ` | 4 | 20 |
//! | glass_blur | `σ = 1.2θ`, `r = 3θ`, 1 iteration | 1 | 8 |
//! | motion_blur | flow scale `= θ` | 1 | 20 |
//! | zoom_blur | 13 zooms with step `0.02θ` | 1 | 30 |
//! | gaussian_noise | `α = θ` | 0.115 | 2 |
//! | impulse_noise | `p = θ` | 0.075 | 1 |
//! | speckle_noise | `α = θ` | 0.45 | 6 |
//! | shot_noise | `c = 1 / θ` | 1/23 | 2 |
//! | pixelate | `fraction = 1 - θ` | 0.84 | 0.97 |
//! | jpeg | `q = round(100 e^-θ)` clamped to 1..=100 | ln(100/6) | ln 100 |
//! | elastic | `α = 110θ`, `σ = 5` | 1 | 8 |
//! | spatter | `noise_sigma = 0.8θ`, `opacity = min(1, 0.6θ)` | 1 | 8 |
//! | frost | image weight `w = 1 - 0.4θ` | 1 | 2.5 |
//! | snow, rain | `density = ρ0 θ`, `tint_strength = min(1, g0 θ)` | 1 | 2 |
//! | fog | `d_m = 45 / θ` | 1 | 200 |

use alloc::vec::Vec;

use crate::corruption::{apply, blur, spatter::SpatterParams, CorruptionKind, CorruptionSpec, FrameAux, Params};
use crate::error::{check_dims, Error, Result};
use crate::scene::{FogParams, WeatherParams};
use crate::ssim::ssim;
use crate::types::ImageFrame;

/// Maximum number of bisection steps.
pub const MAX_ITERATIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeverityKnob {
    pub kind: CorruptionKind,
    pub theta: f64,
}

impl SeverityKnob {
    pub fn new(kind: CorruptionKind, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("severity must be finite and >= 0, got {theta}")));
        }
        Ok(Self { kind, theta })
    }

    /// Knob position of the reference parameter set.
    pub fn reference(kind: CorruptionKind) -> Self {
        use CorruptionKind as K;
        let theta = match kind {
            K::Brightness => 0.39,
            K::Contrast | K::Pixelate => 0.84,
            K::DefocusBlur => 6.0,
            K::GaussianBlur => 4.0,
            K::GaussianNoise => 0.115,
            K::ImpulseNoise => 0.075,
            K::SpeckleNoise => 0.45,
            K::ShotNoise => 1.0 / 23.0,
            K::Jpeg => libm::log(100.0 / 6.0),
            _ => 1.0,
        };
        Self { kind, theta }
    }

    /// Upper end of the search interval.
    pub fn theta_max(kind: CorruptionKind) -> f64 {
        use CorruptionKind as K;
        match kind {
            K::Brightness | K::Contrast | K::ImpulseNoise => 1.0,
            K::Saturate => 40.0,
            K::DefocusBlur => 30.0,
            K::GaussianBlur => 20.0,
            K::GlassBlur | K::Elastic | K::Spatter => 8.0,
            K::MotionBlur => 20.0,
            K::ZoomBlur => 30.0,
            K::GaussianNoise | K::ShotNoise => 2.0,
            K::SpeckleNoise => 6.0,
            K::Pixelate => 0.97,
            K::Jpeg => libm::log(100.0),
            K::Frost => 2.5,
            K::Snow | K::Rain => 2.0,
            K::Fog => 200.0,
        }
    }

    pub fn params(&self) -> Params {
        use CorruptionKind as K;
        let t = self.theta;
        match self.kind {
            K::Brightness => Params::Brightness { c: t },
            K::Contrast => Params::Contrast { c: (1.0 - t).max(0.0) },
            K::Saturate => Params::Saturate {
                alpha: 1.0 + 1.3 * t,
                beta: 0.01 * t,
            },
            K::DefocusBlur => Params::DefocusBlur { radius: t },
            K::GaussianBlur => Params::GaussianBlur { sigma: t },
            K::GlassBlur => Params::GlassBlur {
                sigma: 1.2 * t,
                iterations: 1,
                radius: 3.0 * t,
            },
            K::MotionBlur => Params::MotionBlur { scale: t },
            K::ZoomBlur => Params::ZoomBlur {
                zooms: blur::zoom_schedule(0.02 * t, 13),
            },
            K::GaussianNoise => Params::GaussianNoise { alpha: t },
            K::ImpulseNoise => Params::ImpulseNoise { p: t.min(1.0) },
            K::SpeckleNoise => Params::SpeckleNoise { alpha: t },
            K::ShotNoise => Params::ShotNoise {
                c: if t > 0.0 { 1.0 / t } else { f64::INFINITY },
            },
            K::Pixelate => Params::Pixelate {
                fraction: (1.0 - t).clamp(1e-3, 1.0),
            },
            K::Jpeg => Params::Jpeg {
                quality: libm::round(100.0 * libm::exp(-t)).clamp(1.0, 100.0) as u8,
            },
            K::Elastic => Params::Elastic {
                alpha: 110.0 * t,
                sigma: 5.0,
                keyframe_interval: 10,
            },
            K::Spatter => {
                let d = SpatterParams::default();
                Params::Spatter(SpatterParams {
                    noise_sigma: d.noise_sigma * t,
                    opacity: (d.opacity * t).min(1.0),
                    ..d
                })
            }
            K::Frost => Params::Frost {
                weight: (1.0 - 0.4 * t).clamp(0.0, 1.0),
            },
            K::Snow => Params::Snow(scale_weather(WeatherParams::snow(), t)),
            K::Rain => Params::Rain(scale_weather(WeatherParams::rain(), t)),
            K::Fog => Params::Fog(FogParams {
                visibility: if t > 0.0 { 45.0 / t } else { f64::INFINITY },
                ..FogParams::default()
            }),
        }
    }

    pub fn spec(&self, master_seed: u64) -> Result<CorruptionSpec> {
        CorruptionSpec::new(self.params(), master_seed)
    }
}

fn scale_weather(mut p: WeatherParams, t: f64) -> WeatherParams {
    p.density *= t;
    p.tint_strength = (p.tint_strength * t).min(1.0);
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationTarget {
    pub ssim: f64,
    pub tolerance: f64,
}

impl CalibrationTarget {
    pub const TOLERANCE: f64 = 0.02;

    pub fn new(ssim: f64, tolerance: f64) -> Result<Self> {
        if !(ssim > 0.0 && ssim < 1.0) || tolerance.is_nan() || tolerance < 0.0 {
            return Err(Error::InvalidParameter(alloc::format!(
                "target must be in (0, 1) with tolerance >= 0, got {ssim} ± {tolerance}"
            )));
        }
        Ok(Self { ssim, tolerance })
    }

    /// 0.2 for the noises, 0.7 otherwise, ±0.02.
    pub fn for_kind(kind: CorruptionKind) -> Self {
        Self {
            ssim: kind.target_ssim(),
            tolerance: Self::TOLERANCE,
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        (s - self.ssim).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Calibration {
    pub knob: SeverityKnob,
    pub ssim: f64,
    pub iterations: usize,
    /// The achieved SSIM is within tolerance of the target.
    pub converged: bool,
}

/// One step of the search, for inspecting the bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionStep {
    pub lo: f64,
    pub hi: f64,
    pub ssim_lo: f64,
    pub ssim_hi: f64,
}

/// Bisection on `[0, theta_max]` against an arbitrary SSIM evaluator.
///
/// Keeps `eval(lo) >= target >= eval(hi)`; stops as soon as an evaluated
/// point is within tolerance, or after [`MAX_ITERATIONS`] steps, returning
/// whichever bracket end is closer to the target.
pub fn calibrate_with(
    kind: CorruptionKind,
    target: CalibrationTarget,
    theta_max: f64,
    mut eval: impl FnMut(f64) -> Result<f64>,
    mut trace: impl FnMut(BisectionStep),
) -> Result<Calibration> {
    let (mut lo, mut hi) = (0.0, theta_max);
    let mut s_lo = eval(lo)?;
    let mut s_hi = eval(hi)?;
    let done = |theta: f64, ssim: f64, iterations: usize| Calibration {
        knob: SeverityKnob { kind, theta },
        ssim,
        iterations,
        converged: target.contains(ssim),
    };
    if s_hi > target.ssim + target.tolerance || s_lo < target.ssim - target.tolerance {
        return Err(Error::NotBracketable {
            target: target.ssim,
            theta_max,
            ssim_at_zero: s_lo,
            ssim_at_max: s_hi,
        });
    }
    for it in 1..=MAX_ITERATIONS {
        trace(BisectionStep {
            lo,
            hi,
            ssim_lo: s_lo,
            ssim_hi: s_hi,
        });
        let mid = 0.5 * (lo + hi);
        let s = eval(mid)?;
        if target.contains(s) {
            return Ok(done(mid, s, it));
        }
        if s > target.ssim {
            lo = mid;
            s_lo = s;
        } else {
            hi = mid;
            s_hi = s;
        }
    }
    Ok(if (s_lo - target.ssim).abs() <= (s_hi - target.ssim).abs() {
        done(lo, s_lo, MAX_ITERATIONS)
    } else {
        done(hi, s_hi, MAX_ITERATIONS)
    })
}

/// A clean frame with the inputs its corruptions need.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub frame: &'a ImageFrame,
    pub aux: FrameAux<'a>,
}

/// Mean SSIM between clean samples and their corruption under `spec`.
pub fn mean_ssim(samples: &[Sample<'_>], spec: &CorruptionSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::MissingInput("calibration needs at least one sample frame".into()));
    }
    let mut total = 0.0;
    for s in samples {
        let c = apply(s.frame, spec, &s.aux)?;
        total += ssim(s.frame, &c.frame)?;
    }
    Ok(total / samples.len() as f64)
}

/// Sequential calibration of one kind over `samples`.
pub fn calibrate(kind: CorruptionKind, samples: &[Sample<'_>], target: CalibrationTarget, master_seed: u64) -> Result<Calibration> {
    if samples.is_empty() {
        return Err(Error::MissingInput("calibration needs at least one sample frame".into()));
    }
    calibrate_with(
        kind,
        target,
        SeverityKnob::theta_max(kind),
        |theta| mean_ssim(samples, &SeverityKnob::new(kind, theta)?.spec(master_seed)?),
        |_| {},
    )
}

/// One row of a severity table.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeverityRow {
    pub kind: CorruptionKind,
    pub mean_ssim: f64,
    pub frames: usize,
}

/// Mean SSIM of each spec over the samples, in spec order.
pub fn verify_severity(specs: &[CorruptionSpec], samples: &[Sample<'_>]) -> Result<Vec<SeverityRow>> {
    specs
        .iter()
        .map(|spec| {
            Ok(SeverityRow {
                kind: spec.kind(),
                mean_ssim: mean_ssim(samples, spec)?,
                frames: samples.len(),
            })
        })
        .collect()
}

/// Mean SSIM over already corrupted `(clean, corrupt)` pairs.
pub fn severity_from_pairs(kind: CorruptionKind, pairs: &[(&ImageFrame, &ImageFrame)]) -> Result<SeverityRow> {
    if pairs.is_empty() {
        return Err(Error::MissingInput(alloc::format!("no clean/corrupt pairs for {kind}")));
    }
    let mut total = 0.0;
    for (a, b) in pairs {
        check_dims(a.dims(), b.dims())?;
        if a.coord != b.coord {
            return Err(Error::MissingInput(alloc::format!(
                "clean frame {}/{}/{} paired with {}/{}/{}",
                a.coord.scene_id,
                a.coord.camera,
                a.coord.time_index,
                b.coord.scene_id,
                b.coord.camera,
                b.coord.time_index
            )));
        }
        total += ssim(a, b)?;
    }
    Ok(SeverityRow {
        kind,
        mean_ssim: total / pairs.len() as f64,
        frames: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::SceneInput;
    use crate::synthetic::{generate_scene, SceneConfig};
    use alloc::vec;

    fn tiny() -> SceneInput {
        let cfg = SceneConfig {
            width: 40,
            height: 32,
            time_steps: 1,
            focal_x: 40.0,
            ..SceneConfig::default()
        };
        SceneInput::from(&generate_scene("c", &cfg, 8).unwrap())
    }

    fn samples(scene: &SceneInput) -> Vec<Sample<'_>> {
        scene
            .frames
            .iter()
            .map(|f| Sample {
                frame: &f.frame,
                aux: f.aux(scene, &[]),
            })
            .collect()
    }

    #[test]
    fn theta_zero_is_identity_for_every_kind() {
        let scene = tiny();
        let s = samples(&scene);
        for kind in CorruptionKind::ALL {
            let spec = SeverityKnob::new(kind, 0.0).unwrap().spec(1).unwrap();
            let v = mean_ssim(&s, &spec).unwrap();
            // Quality 100 is the weakest JPEG setting, not a lossless one.
            let tol = if kind == CorruptionKind::Jpeg { 1e-2 } else { 1e-6 };
            assert!((v - 1.0).abs() < tol, "{kind}: {v}");
        }
    }

    #[test]
    fn reference_knob_reproduces_default_parameters() {
        for kind in CorruptionKind::ALL {
            let p = SeverityKnob::reference(kind).params();
            let d = Params::default_for(kind);
            match (&p, &d) {
                (Params::Contrast { c: a }, Params::Contrast { c: b }) | (Params::Pixelate { fraction: a }, Params::Pixelate { fraction: b }) => {
                    assert!((a - b).abs() < 1e-12, "{kind}")
                }
                (Params::ShotNoise { c: a }, Params::ShotNoise { c: b }) => assert!((a - b).abs() < 1e-9),
                _ => assert_eq!(p, d, "{kind}"),
            }
        }
    }

    #[test]
    fn bisection_keeps_bracket_and_converges() {
        let target = CalibrationTarget::new(0.7, 0.001).unwrap();
        let mut steps = Vec::new();
        let c = calibrate_with(CorruptionKind::GaussianBlur, target, 10.0, |t| Ok(1.0 - 0.04 * t * t), |s| steps.push(s)).unwrap();
        assert!(c.converged);
        assert!((c.knob.theta - libm::sqrt(7.5)).abs() < 0.02);
        assert!(c.iterations <= MAX_ITERATIONS);
        for s in steps {
            assert!(s.ssim_lo >= target.ssim && target.ssim >= s.ssim_hi);
            assert!(s.lo < s.hi);
        }
    }

    #[test]
    fn exhausted_search_returns_closest_end() {
        // A jump across the band can never land inside it.
        let target = CalibrationTarget::new(0.5, 0.01).unwrap();
        let c = calibrate_with(CorruptionKind::Jpeg, target, 1.0, |t| Ok(if t < 0.3 { 0.9 } else { 0.2 }), |_| {}).unwrap();
        assert!(!c.converged);
        assert_eq!(c.iterations, MAX_ITERATIONS);
        assert!((c.knob.theta - 0.3).abs() < 1e-9);
    }

    #[test]
    fn not_bracketable_reports_range() {
        let target = CalibrationTarget::for_kind(CorruptionKind::Brightness);
        let err = calibrate_with(CorruptionKind::Brightness, target, 1.0, |t| Ok(1.0 - 0.1 * t), |_| {}).unwrap_err();
        match err {
            Error::NotBracketable { ssim_at_max, theta_max, .. } => {
                assert!((ssim_at_max - 0.9).abs() < 1e-12);
                assert_eq!(theta_max, 1.0);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn calibration_is_reproducible() {
        let scene = tiny();
        let s = samples(&scene);
        let target = CalibrationTarget::for_kind(CorruptionKind::GaussianNoise);
        let a = calibrate(CorruptionKind::GaussianNoise, &s, target, 5).unwrap();
        let b = calibrate(CorruptionKind::GaussianNoise, &s, target, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.converged);
    }

    #[test]
    fn invalid_inputs() {
        assert!(SeverityKnob::new(CorruptionKind::Fog, -1.0).is_err());
        assert!(CalibrationTarget::new(1.0, 0.02).is_err());
        assert!(calibrate(CorruptionKind::Fog, &[], CalibrationTarget::for_kind(CorruptionKind::Fog), 0).is_err());
        assert!(severity_from_pairs(CorruptionKind::Fog, &[]).is_err());
    }

    #[test]
    fn verify_severity_identity_and_row_count() {
        let scene = tiny();
        let s = samples(&scene);
        let specs: Vec<CorruptionSpec> = [CorruptionKind::Brightness, CorruptionKind::Fog, CorruptionKind::Jpeg]
            .iter()
            .map(|&k| SeverityKnob::new(k, 0.0).unwrap().spec(0).unwrap())
            .collect();
        let rows = verify_severity(&specs, &s).unwrap();
        assert_eq!(rows.len(), 3);
        // JPEG at quality 100 is lossy, so it is excluded from the identity check.
        assert!(rows[..2].iter().all(|r| (r.mean_ssim - 1.0).abs() < 1e-9));
        let pairs = vec![(&scene.frames[0].frame, &scene.frames[0].frame)];
        assert_eq!(severity_from_pairs(CorruptionKind::Fog, &pairs).unwrap().mean_ssim, 1.0);
        let bad = vec![(&scene.frames[0].frame, &scene.frames[1].frame)];
        assert!(severity_from_pairs(CorruptionKind::Fog, &bad).is_err());
    }
}
