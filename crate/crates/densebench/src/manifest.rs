//! Scene manifests (TOML).
//!
//! ```toml
//! version = 1
//! [rig]
//! focal_x = 150.0
//! baseline = 0.12
//! [assets]            # optional
//! frost_dir = "frost" # PNG textures
//! [[scenes]]
//! scene_id = "scene0"
//! [[scenes.frames]]
//! time_index = 0
//! camera = "left"
//! image = "scene0/left/0000.png"
//! disparity = "scene0/left/0000.disp1.rsf" # optional, arity 1
//! depth = "scene0/left/0000.depth.rsf"     # optional, meters; wins over disparity
//! flow = "scene0/left/0000.flow.rsf"       # optional, arity 2
//! ```
//!
//! Paths are relative to the manifest's directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use densebench_core::pipeline::{FrameInput, SceneInput};
use densebench_core::scene::PoseTrack;
use densebench_core::{depth_from_disparity, Camera, CameraRig, FieldKind, FrameCoord, Raster};
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};
use crate::files::{read_depth, read_field};
use crate::imageio::{decode_png, read_image};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub time_index: u32,
    pub camera: Camera,
    pub image: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disparity: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene_id: String,
    pub frames: Vec<FrameEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poses: Option<PoseTrack>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frost_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub rig: CameraRig,
    #[serde(default)]
    pub assets: Assets,
    pub scenes: Vec<SceneEntry>,
    /// Directory the relative paths resolve against.
    #[serde(skip)]
    pub root: PathBuf,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = String::from_utf8(error::read(path)?).map_err(|e| Error::decode(path, e))?;
        let mut m: Manifest = toml::from_str(&text).map_err(|e| Error::decode(path, e))?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate(path)?;
        Ok(m)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest fields are TOML-representable")
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.root.join(p)
    }

    /// Structural checks plus existence of every referenced file.
    pub fn validate(&self, path: &Path) -> Result<()> {
        let bad = |msg: String| Err(Error::Contract(format!("{}: {msg}", path.display())));
        if self.version != MANIFEST_VERSION {
            return bad(format!("unsupported manifest version {}", self.version));
        }
        self.rig.validate().map_err(|e| Error::in_file(path, e))?;
        let mut ids = BTreeSet::new();
        for s in &self.scenes {
            if !ids.insert(&s.scene_id) {
                return bad(format!("scene {} listed twice", s.scene_id));
            }
            let mut coords = BTreeSet::new();
            for f in &s.frames {
                if !coords.insert((f.time_index, f.camera)) {
                    return bad(format!("frame {}/{}/{} listed twice", s.scene_id, f.camera, f.time_index));
                }
            }
            let times: BTreeSet<u32> = s.frames.iter().map(|f| f.time_index).collect();
            if let (Some(&lo), Some(&hi)) = (times.first(), times.last()) {
                if (hi - lo + 1) as usize != times.len() {
                    return bad(format!("scene {} has gaps in its time indices", s.scene_id));
                }
            }
            for &t in &times {
                for cam in Camera::BOTH {
                    if !coords.contains(&(t, cam)) {
                        return bad(format!("scene {} lacks frame {}/{}/{}", s.scene_id, s.scene_id, cam, t));
                    }
                }
            }
            for f in &s.frames {
                let refs = [Some(&f.image), f.disparity.as_ref(), f.depth.as_ref(), f.flow.as_ref()];
                for p in refs.into_iter().flatten() {
                    let full = self.resolve(p);
                    if !full.is_file() {
                        return Err(Error::io(
                            &full,
                            std::io::Error::new(std::io::ErrorKind::NotFound, format!("referenced by frame {}/{}/{}", s.scene_id, f.camera, f.time_index)),
                        ));
                    }
                }
            }
        }
        if let Some(d) = &self.assets.frost_dir {
            if !self.resolve(d).is_dir() {
                return bad(format!("frost texture directory {} does not exist", d.display()));
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.scenes.iter().map(|s| s.frames.len()).sum()
    }

    /// Reads every file of one scene. Frames are ordered by time, then
    /// camera.
    pub fn load_scene(&self, index: usize) -> Result<SceneInput> {
        let s = &self.scenes[index];
        let mut entries: Vec<&FrameEntry> = s.frames.iter().collect();
        entries.sort_by_key(|f| (f.time_index, f.camera));
        let mut frames = Vec::with_capacity(entries.len());
        for f in entries {
            let coord = FrameCoord::new(s.scene_id.clone(), f.time_index, f.camera);
            let image_path = self.resolve(&f.image);
            let frame = read_image(&image_path, coord)?;
            let depth = match (&f.depth, &f.disparity) {
                (Some(d), _) => Some(read_depth(&self.resolve(d))?),
                (None, Some(d)) => {
                    let p = self.resolve(d);
                    let disp = read_field(&p, FieldKind::Disparity1)?;
                    Some(depth_from_disparity(&disp, &self.rig).map_err(|e| Error::in_file(&p, e))?)
                }
                (None, None) => None,
            };
            let flow = f
                .flow
                .as_ref()
                .map(|p| read_field(&self.resolve(p), FieldKind::Flow))
                .transpose()?;
            for (what, dims) in [("depth", depth.as_ref().map(|d| d.dims())), ("flow", flow.as_ref().map(|f| f.dims()))] {
                if let Some(dims) = dims {
                    if dims != frame.dims() {
                        return Err(Error::Contract(format!(
                            "{}: {what} is {}x{} but the image is {}x{}",
                            image_path.display(),
                            dims.0,
                            dims.1,
                            frame.width(),
                            frame.height()
                        )));
                    }
                }
            }
            frames.push(FrameInput { frame, depth, flow });
        }
        Ok(SceneInput {
            rig: self.rig,
            frames,
            poses: s.poses.clone(),
        })
    }

    /// Frost textures from the asset directory, sorted by file name.
    pub fn frost_textures(&self) -> Result<Vec<Raster>> {
        let Some(dir) = &self.assets.frost_dir else {
            return Ok(Vec::new());
        };
        let dir = self.resolve(dir);
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "png"))
            .collect();
        paths.sort();
        paths.iter().map(|p| decode_png(&error::read(p)?, p)).collect()
    }
}
