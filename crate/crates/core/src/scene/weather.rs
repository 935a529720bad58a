//! Per-scene snow and rain: one world-space simulation, rendered into every
//! requested view.
//!
//! Substeps have length `dt = 1 / (fps * substeps)`. The simulation starts
//! `m = ceil(exposure / dt)` substeps before the first frame so the first
//! streak window is complete; frame `t` is at substep `m + t * substeps`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::corruption::{Corrupted, CorruptionKind, CorruptionSpec, Params, Provenance};
use crate::error::{check_dims, Error, Result};
use crate::scene::particles::{spawn_field, step_field, SpawnVolume, WeatherParams};
use crate::scene::render::{splat_sprites, splat_step, Accumulator, RenderStats, Style, View};
use crate::seed;
use crate::types::{Camera, CameraRig, DepthMap, FrameCoord, ImageFrame, Pose, Raster};

/// Per-frame world-to-camera poses, indexed by time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoseTrack {
    pub left: Vec<Pose>,
    pub right: Vec<Pose>,
}

impl PoseTrack {
    pub fn pose(&self, camera: Camera, time_index: u32) -> Option<Pose> {
        let track = match camera {
            Camera::Left => &self.left,
            Camera::Right => &self.right,
        };
        track.get(time_index as usize).copied()
    }
}

/// One view to render.
#[derive(Debug, Clone, Copy)]
pub struct RenderJob<'a> {
    pub camera: Camera,
    pub time_index: u32,
    pub image: &'a Raster,
    pub depth: &'a DepthMap,
}

#[derive(Debug, Clone)]
pub struct WeatherSim<'a> {
    pub style: Style,
    pub params: WeatherParams,
    pub rig: CameraRig,
    pub width: usize,
    pub height: usize,
    pub poses: Option<&'a PoseTrack>,
    pub seed: u64,
    pub volume: SpawnVolume,
}

impl<'a> WeatherSim<'a> {
    pub fn new(
        kind: CorruptionKind,
        params: &WeatherParams,
        rig: &CameraRig,
        width: usize,
        height: usize,
        poses: Option<&'a PoseTrack>,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let style = match kind {
            CorruptionKind::Snow => Style::Sprite,
            CorruptionKind::Rain => Style::Streak,
            other => return Err(Error::KindMismatch(format!("{other} is not a particle weather kind"))),
        };
        let reference = match poses {
            Some(track) => track
                .pose(Camera::Left, 0)
                .ok_or_else(|| Error::MissingInput("pose track has no left pose at time 0".into()))?,
            None => Pose::rectified(Camera::Left, rig.baseline),
        };
        Ok(Self {
            style,
            params: params.clone(),
            rig: *rig,
            width,
            height,
            poses,
            seed,
            volume: SpawnVolume::for_rig(rig, width, height, params.near, params.far, reference)?,
        })
    }

    pub fn dt(&self) -> f64 {
        1.0 / (self.params.fps * self.params.substeps as f64)
    }

    /// Substeps covered by the streak exposure window.
    pub fn window_steps(&self) -> usize {
        match self.style {
            Style::Streak => libm::ceil(self.params.exposure / self.dt() - 1e-9).max(0.0) as usize,
            Style::Sprite => 0,
        }
    }

    pub fn frame_step(&self, time_index: u32) -> usize {
        self.window_steps() + time_index as usize * self.params.substeps as usize
    }

    pub fn step_time(&self, k: usize) -> f64 {
        (k as f64 - self.window_steps() as f64) * self.dt()
    }

    pub fn view(&self, camera: Camera, time_index: u32) -> Result<View> {
        let pose = match self.poses {
            Some(track) => track.pose(camera, time_index).ok_or_else(|| {
                Error::MissingInput(format!("no {camera} pose for time {time_index}"))
            })?,
            None => Pose::rectified(camera, self.rig.baseline),
        };
        Ok(View::new(&self.rig, pose, self.width, self.height))
    }

    /// Fingerprint of the initial particle population, shared by every
    /// view rendered from this simulation.
    pub fn fingerprint(&self) -> u64 {
        let field = spawn_field(&self.params, &self.volume, self.seed);
        seed::fingerprint(
            [self.seed, field.particles.len() as u64]
                .into_iter()
                .chain(field.particles.iter().flat_map(|q| q.position.map(f64::to_bits))),
        )
    }

    /// Runs the simulation once and renders every job.
    pub fn render(&self, jobs: &[RenderJob<'_>]) -> Result<Vec<(Raster, RenderStats)>> {
        let mut views = Vec::with_capacity(jobs.len());
        for j in jobs {
            check_dims(j.image.dims(), (self.width, self.height))?;
            check_dims(j.depth.dims(), (self.width, self.height))?;
            views.push(self.view(j.camera, j.time_index)?);
        }
        let mut accs: Vec<Accumulator> = jobs.iter().map(|_| Accumulator::new(self.width, self.height)).collect();
        let last = jobs.iter().map(|j| self.frame_step(j.time_index)).max().unwrap_or(0);
        let dt = self.dt();
        let mut field = spawn_field(&self.params, &self.volume, self.seed);
        for k in 0..=last {
            if k > 0 {
                let t_prev = self.step_time(k - 1);
                let prev = (self.style == Style::Streak).then(|| field.clone());
                step_field(&mut field, &self.params, t_prev, dt);
                if let Some(prev) = prev {
                    let t_cur = self.step_time(k);
                    for (i, j) in jobs.iter().enumerate() {
                        let frame_step = self.frame_step(j.time_index);
                        let frame_time = self.step_time(frame_step);
                        if k <= frame_step {
                            let start = frame_time - self.params.exposure;
                            splat_step(&mut accs[i], &views[i], j.depth, &prev, &field, t_prev, t_cur, start, &self.params);
                        }
                    }
                }
            }
            if self.style == Style::Sprite {
                for (i, j) in jobs.iter().enumerate() {
                    if self.frame_step(j.time_index) == k {
                        splat_sprites(&mut accs[i], &views[i], j.depth, &field, &self.params);
                    }
                }
            }
        }
        Ok(jobs
            .iter()
            .zip(&accs)
            .map(|(j, acc)| (acc.composite(j.image, self.params.tint, self.params.tint_strength), acc.stats))
            .collect())
    }
}

/// Renders a single frame; equivalent to the matching entry of
/// [`corrupt_weather`].
pub fn render_weather_frame(sim: &WeatherSim<'_>, img: &Raster, depth: &DepthMap, coord: &FrameCoord) -> Result<Raster> {
    let job = RenderJob {
        camera: coord.camera,
        time_index: coord.time_index,
        image: img,
        depth,
    };
    let mut out = sim.render(&[job])?;
    Ok(out.remove(0).0)
}

/// Snow or rain over a scene's frames. Every time index needs both
/// cameras. Frames sharing a stream seed share one simulation; outputs
/// follow input order.
pub fn corrupt_weather(
    frames: &[ImageFrame],
    depths: &[DepthMap],
    rig: &CameraRig,
    spec: &CorruptionSpec,
    poses: Option<&PoseTrack>,
) -> Result<Vec<(Corrupted, RenderStats)>> {
    spec.validate()?;
    let kind = spec.kind();
    let (Params::Snow(params) | Params::Rain(params)) = &spec.params else {
        return Err(Error::KindMismatch(format!("{kind} is not a particle weather kind")));
    };
    if frames.len() != depths.len() {
        return Err(Error::SizeMismatch {
            expected: frames.len(),
            found: depths.len(),
        });
    }
    let Some(first) = frames.first() else {
        return Ok(Vec::new());
    };
    for f in frames {
        check_dims(f.dims(), first.dims())?;
        for cam in Camera::BOTH {
            let has = frames.iter().any(|g| {
                g.coord.scene_id == f.coord.scene_id && g.coord.time_index == f.coord.time_index && g.coord.camera == cam
            });
            if !has {
                return Err(Error::MissingInput(format!(
                    "missing stereo counterpart {}/{}/{}",
                    f.coord.scene_id, cam, f.coord.time_index
                )));
            }
        }
    }
    let mut groups: BTreeMap<(&str, u64), Vec<usize>> = BTreeMap::new();
    for (i, f) in frames.iter().enumerate() {
        groups
            .entry((f.coord.scene_id.as_str(), spec.stream_seed(&f.coord)))
            .or_default()
            .push(i);
    }
    let (w, h) = first.dims();
    let mut out: Vec<Option<(Corrupted, RenderStats)>> = frames.iter().map(|_| None).collect();
    for ((_, stream_seed), idx) in groups {
        let sim = WeatherSim::new(kind, params, rig, w, h, poses, stream_seed)?;
        let pattern = sim.fingerprint();
        let jobs: Vec<RenderJob<'_>> = idx
            .iter()
            .map(|&i| RenderJob {
                camera: frames[i].coord.camera,
                time_index: frames[i].coord.time_index,
                image: frames[i].raster(),
                depth: &depths[i],
            })
            .collect();
        for (&i, (img, stats)) in idx.iter().zip(sim.render(&jobs)?) {
            let coord = frames[i].coord.clone();
            out[i] = Some((
                Corrupted {
                    frame: ImageFrame::from_raster(img, coord.clone()),
                    provenance: Provenance {
                        coord,
                        params: spec.params.clone(),
                        consistency: spec.consistency,
                        stream_seed,
                        pattern: Some(pattern),
                    },
                },
                stats,
            ));
        }
    }
    Ok(out.into_iter().map(|o| o.expect("every frame belongs to a group")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corruption::{apply, FrameAux};

    fn scene(times: u32) -> (Vec<ImageFrame>, Vec<DepthMap>) {
        let mut frames = Vec::new();
        let mut depths = Vec::new();
        for t in 0..times {
            for cam in Camera::BOTH {
                let img = Raster::from_fn(64, 48, |x, y| [x as f32 / 64.0, y as f32 / 48.0, 0.4]);
                frames.push(ImageFrame::from_raster(img, FrameCoord::new("s", t, cam)));
                depths.push(DepthMap::constant(64, 48, 3.0));
            }
        }
        (frames, depths)
    }

    fn spec(kind: CorruptionKind, density: f64) -> CorruptionSpec {
        let mut p = match kind {
            CorruptionKind::Snow => WeatherParams::snow(),
            _ => WeatherParams::rain(),
        };
        p.density = density;
        let params = if kind == CorruptionKind::Snow { Params::Snow(p) } else { Params::Rain(p) };
        CorruptionSpec::new(params, 42).unwrap()
    }

    #[test]
    fn views_share_one_simulation() {
        let rig = CameraRig::new(64.0, 0.1).unwrap();
        let (frames, depths) = scene(2);
        for kind in [CorruptionKind::Snow, CorruptionKind::Rain] {
            let out = corrupt_weather(&frames, &depths, &rig, &spec(kind, 50.0), None).unwrap();
            for (c, _) in &out {
                assert!(c.provenance.same_realization(&out[0].0.provenance));
            }
            assert!(out.iter().all(|(_, s)| s.fragments > 0));
        }
    }

    #[test]
    fn single_frame_path_matches_sequence() {
        let rig = CameraRig::new(64.0, 0.1).unwrap();
        let (frames, depths) = scene(2);
        for kind in [CorruptionKind::Snow, CorruptionKind::Rain] {
            let s = spec(kind, 40.0);
            let seq = corrupt_weather(&frames, &depths, &rig, &s, None).unwrap();
            for i in [1, 2] {
                let aux = FrameAux {
                    depth: Some(&depths[i]),
                    rig: Some(&rig),
                    ..FrameAux::default()
                };
                let one = apply(&frames[i], &s, &aux).unwrap();
                assert_eq!(one.frame, seq[i].0.frame);
                assert_eq!(one.provenance, seq[i].0.provenance);
            }
        }
    }

    #[test]
    fn missing_counterpart_is_an_error() {
        let rig = CameraRig::new(64.0, 0.1).unwrap();
        let (mut frames, mut depths) = scene(1);
        frames.pop();
        depths.pop();
        let err = corrupt_weather(&frames, &depths, &rig, &spec(CorruptionKind::Snow, 10.0), None).unwrap_err();
        assert!(matches!(err, Error::MissingInput(_)));
    }

    #[test]
    fn doubling_density_doubles_fragments() {
        let rig = CameraRig::new(64.0, 0.1).unwrap();
        let (frames, depths) = scene(1);
        for kind in [CorruptionKind::Snow, CorruptionKind::Rain] {
            let count = |d: f64| -> f64 {
                corrupt_weather(&frames, &depths, &rig, &spec(kind, d), None)
                    .unwrap()
                    .iter()
                    .map(|(_, s)| s.fragments as f64)
                    .sum()
            };
            let ratio = count(400.0) / count(200.0);
            assert!((ratio - 2.0).abs() <= 0.1, "{kind}: {ratio}");
        }
    }

    #[test]
    fn zero_density_without_tint_is_identity() {
        let rig = CameraRig::new(64.0, 0.1).unwrap();
        let (frames, depths) = scene(1);
        let mut p = WeatherParams::rain();
        p.density = 0.0;
        p.tint_strength = 0.0;
        let s = CorruptionSpec::new(Params::Rain(p), 1).unwrap();
        let out = corrupt_weather(&frames, &depths, &rig, &s, None).unwrap();
        for ((c, _), f) in out.iter().zip(&frames) {
            assert_eq!(&c.frame, f);
        }
    }
}
