//! Corrupting whole scenes.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corruption::{apply, Corrupted, CorruptionKind, CorruptionSpec, FrameAux};
use crate::error::{Error, Result};
use crate::scene::{corrupt_weather, PoseTrack};
use crate::types::{CameraRig, DepthMap, ImageFrame, PredictionField, Raster};

/// A clean frame with its optional geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub frame: ImageFrame,
    pub depth: Option<DepthMap>,
    pub flow: Option<PredictionField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneInput {
    pub rig: CameraRig,
    pub frames: Vec<FrameInput>,
    pub poses: Option<PoseTrack>,
}

impl FrameInput {
    pub fn aux<'a>(&'a self, scene: &'a SceneInput, frost_textures: &'a [Raster]) -> FrameAux<'a> {
        FrameAux {
            depth: self.depth.as_ref(),
            flow: self.flow.as_ref(),
            rig: Some(&scene.rig),
            poses: scene.poses.as_ref(),
            frost_textures,
        }
    }

    fn name(&self) -> String {
        let c = &self.frame.coord;
        format!("{}/{}/{}", c.scene_id, c.camera, c.time_index)
    }
}

/// Fails with every frame that lacks an input `kind` needs.
pub fn check_inputs(scene: &SceneInput, kind: CorruptionKind) -> Result<()> {
    let mut missing = Vec::new();
    for f in &scene.frames {
        if kind.needs_depth() && f.depth.is_none() {
            missing.push(format!("{} (depth)", f.name()));
        }
        if kind.needs_flow() && f.flow.is_none() {
            missing.push(format!("{} (flow)", f.name()));
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingInput(format!("{kind} lacks inputs for frames: {}", missing.join(", "))))
    }
}

pub fn corrupt_frame(input: &FrameInput, scene: &SceneInput, spec: &CorruptionSpec, frost_textures: &[Raster]) -> Result<Corrupted> {
    apply(&input.frame, spec, &input.aux(scene, frost_textures))
}

/// Whether `kind` runs one shared simulation per scene instead of
/// independent frames.
pub fn is_scene_level(kind: CorruptionKind) -> bool {
    matches!(kind, CorruptionKind::Snow | CorruptionKind::Rain)
}

/// Corrupts every frame of a scene, in input order.
pub fn corrupt_scene(scene: &SceneInput, spec: &CorruptionSpec, frost_textures: &[Raster]) -> Result<Vec<Corrupted>> {
    let kind = spec.kind();
    check_inputs(scene, kind)?;
    if is_scene_level(kind) {
        let frames: Vec<ImageFrame> = scene.frames.iter().map(|f| f.frame.clone()).collect();
        let depths: Vec<DepthMap> = scene.frames.iter().filter_map(|f| f.depth.clone()).collect();
        return Ok(corrupt_weather(&frames, &depths, &scene.rig, spec, scene.poses.as_ref())?
            .into_iter()
            .map(|(c, _)| c)
            .collect());
    }
    scene
        .frames
        .iter()
        .map(|f| corrupt_frame(f, scene, spec, frost_textures))
        .collect()
}

impl From<&crate::synthetic::SyntheticScene> for SceneInput {
    fn from(s: &crate::synthetic::SyntheticScene) -> Self {
        SceneInput {
            rig: s.rig,
            frames: s
                .frames
                .iter()
                .map(|f| FrameInput {
                    frame: f.image.clone(),
                    depth: Some(f.depth.clone()),
                    flow: Some(f.flow.clone()),
                })
                .collect(),
            poses: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_scene, SceneConfig};

    fn small() -> SceneInput {
        let cfg = SceneConfig {
            width: 48,
            height: 36,
            focal_x: 45.0,
            ..SceneConfig::default()
        };
        SceneInput::from(&generate_scene("p", &cfg, 2).unwrap())
    }

    #[test]
    fn every_kind_runs_on_a_scene() {
        let scene = small();
        for kind in CorruptionKind::ALL {
            let mut spec = CorruptionSpec::default_for(kind, 3);
            if let crate::Params::Rain(w) | crate::Params::Snow(w) = &mut spec.params {
                w.density *= 0.05;
            }
            let out = corrupt_scene(&scene, &spec, &[]).unwrap();
            assert_eq!(out.len(), scene.frames.len());
            for (o, i) in out.iter().zip(&scene.frames) {
                assert_eq!(o.frame.coord, i.frame.coord);
                assert!(o.frame.data().iter().all(|v| (0.0..=1.0).contains(v)), "{kind}");
            }
        }
    }

    #[test]
    fn missing_depth_lists_frames() {
        let mut scene = small();
        scene.frames[1].depth = None;
        scene.frames[3].depth = None;
        let err = corrupt_scene(&scene, &CorruptionSpec::default_for(CorruptionKind::Fog, 0), &[]).unwrap_err();
        let msg = alloc::string::ToString::to_string(&err);
        assert!(msg.contains("p/right/0") && msg.contains("p/right/1"), "{msg}");
        assert!(corrupt_scene(&scene, &CorruptionSpec::default_for(CorruptionKind::Brightness, 0), &[]).is_ok());
    }

    #[test]
    fn frame_path_equals_scene_path() {
        let scene = small();
        let spec = CorruptionSpec::default_for(CorruptionKind::GlassBlur, 4);
        let whole = corrupt_scene(&scene, &spec, &[]).unwrap();
        for (f, w) in scene.frames.iter().zip(&whole) {
            assert_eq!(&corrupt_frame(f, &scene, &spec, &[]).unwrap(), w);
        }
    }
}
