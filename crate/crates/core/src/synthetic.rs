//! Procedural stereo video with exact geometry.
//!
//! A scene is a textured background plane plus a few nearer fronto-parallel
//! rectangles, each translating at a constant image velocity. Because every
//! surface is fronto-parallel, disparity `f_x * B / Z`, depth and forward
//! flow are exact per pixel for both cameras.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::seed::{derive, fnv1a64, mix, rng};
use crate::types::{Camera, CameraRig, DepthMap, FieldKind, FrameCoord, ImageFrame, PredictionField, Raster};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub width: usize,
    pub height: usize,
    pub time_steps: u32,
    /// Number of foreground rectangles.
    pub layers: usize,
    /// Focal length in pixels.
    pub focal_x: f64,
    /// Stereo baseline in meters.
    pub baseline: f64,
    /// Enlarges texture features by this factor.
    pub texture_scale: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            time_steps: 2,
            layers: 4,
            focal_x: 150.0,
            baseline: 0.12,
            texture_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    depth: f64,
    /// Footprint in left-view pixels at `t = 0`; `None` fills the frame.
    rect: Option<[f64; 4]>,
    velocity: [f64; 2],
    texture_seed: u64,
    base: [f64; 3],
    tint: [f64; 3],
}

/// One rendered view with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    pub image: ImageFrame,
    pub disparity: PredictionField,
    pub depth: DepthMap,
    /// Forward flow to the next time step.
    pub flow: PredictionField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub scene_id: String,
    pub rig: CameraRig,
    pub width: usize,
    pub height: usize,
    /// Ordered by time, then left before right.
    pub frames: Vec<SyntheticFrame>,
}

impl SyntheticScene {
    pub fn frame(&self, camera: Camera, time_index: u32) -> Option<&SyntheticFrame> {
        self.frames
            .iter()
            .find(|f| f.image.coord.camera == camera && f.image.coord.time_index == time_index)
    }
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Lattice value noise in `[0, 1]` with smoothstep interpolation.
fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let (fx, fy) = (libm::floor(x), libm::floor(y));
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smooth(x - fx), smooth(y - fy));
    let at = |i: i64, j: i64| unit(mix(seed ^ mix((i as u64).wrapping_mul(0x9E37_79B9) ^ ((j as u64) << 32))));
    let a = at(ix, iy) + (at(ix + 1, iy) - at(ix, iy)) * tx;
    let b = at(ix, iy + 1) + (at(ix + 1, iy + 1) - at(ix, iy + 1)) * tx;
    a + (b - a) * ty
}

/// Octave periods in pixels and their relative amplitudes.
const OCTAVES: [(f64, f64); 6] = [(48.0, 1.0), (24.0, 0.8), (12.0, 0.65), (6.0, 0.5), (3.0, 0.4), (1.5, 0.3)];

/// Fractal texture value in roughly `[-1, 1]` at texture coordinate `(u, v)`.
fn texture(seed: u64, u: f64, v: f64) -> f64 {
    let norm: f64 = OCTAVES.iter().map(|o| o.1).sum();
    let mut acc = 0.0;
    for (k, &(period, amp)) in OCTAVES.iter().enumerate() {
        let s = derive(seed, k as u64);
        acc += amp * (2.0 * value_noise(s, u / period, v / period) - 1.0);
    }
    // A sharp threshold on a coarse octave adds hard edges inside surfaces.
    let blotch = value_noise(derive(seed, 99), u / 20.0, v / 20.0);
    let edge = if blotch > 0.6 { 0.6 } else { 0.0 };
    1.6 * acc / norm + edge - 0.3
}

fn make_layers(cfg: &SceneConfig, seed: u64) -> Vec<Layer> {
    let mut r = rng(seed);
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let color = |r: &mut rand_chacha::ChaCha8Rng| -> ([f64; 3], [f64; 3]) {
        let base = [r.random_range(0.3..0.7), r.random_range(0.3..0.7), r.random_range(0.3..0.7)];
        let tint = [r.random_range(0.15..0.3), r.random_range(0.15..0.3), r.random_range(0.15..0.3)];
        (base, tint)
    };
    let (base, tint) = color(&mut r);
    let mut layers = Vec::with_capacity(cfg.layers + 1);
    let mut fg = Vec::with_capacity(cfg.layers);
    for _ in 0..cfg.layers {
        let depth = r.random_range(1.2..4.0);
        let rw = r.random_range(0.2..0.5) * w;
        let rh = r.random_range(0.2..0.5) * h;
        let x0 = r.random_range(-0.1 * w..w - 0.4 * rw);
        let y0 = r.random_range(-0.1 * h..h - 0.4 * rh);
        let velocity = [r.random_range(-3.0..3.0), r.random_range(-1.5..1.5)];
        let (b, t) = color(&mut r);
        fg.push(Layer {
            depth,
            rect: Some([x0, y0, x0 + rw, y0 + rh]),
            velocity,
            texture_seed: r.random(),
            base: b,
            tint: t,
        });
    }
    fg.sort_by(|a, b| a.depth.total_cmp(&b.depth));
    layers.extend(fg);
    layers.push(Layer {
        depth: r.random_range(7.0..10.0),
        rect: None,
        velocity: [r.random_range(-0.8..0.8), r.random_range(-0.3..0.3)],
        texture_seed: r.random(),
        base,
        tint,
    });
    layers
}

fn render_view(cfg: &SceneConfig, rig: &CameraRig, layers: &[Layer], camera: Camera, t: u32, coord: FrameCoord) -> SyntheticFrame {
    let (w, h) = (cfg.width, cfg.height);
    let mut img = Vec::with_capacity(w * h * 3);
    let mut disp = Vec::with_capacity(w * h);
    let mut depth = Vec::with_capacity(w * h);
    let mut flow = Vec::with_capacity(w * h * 2);
    let fb = rig.focal_x * rig.baseline;
    let ts = 1.0 / cfg.texture_scale;
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let hit = layers
                .iter()
                .find(|l| {
                    let d = if camera == Camera::Right { fb / l.depth } else { 0.0 };
                    l.rect.is_none_or(|[x0, y0, x1, y1]| {
                        let lx = px + d - l.velocity[0] * t as f64;
                        let ly = py - l.velocity[1] * t as f64;
                        lx >= x0 && lx < x1 && ly >= y0 && ly < y1
                    })
                })
                .unwrap_or_else(|| &layers[layers.len() - 1]);
            let d = fb / hit.depth;
            let shift = if camera == Camera::Right { d } else { 0.0 };
            let u = px + shift - hit.velocity[0] * t as f64;
            let v = py - hit.velocity[1] * t as f64;
            let s = texture(hit.texture_seed, u * ts, v * ts);
            let hue = value_noise(derive(hit.texture_seed, 7), u * ts / 64.0, v * ts / 64.0) - 0.5;
            for c in 0..3 {
                let tint = hit.tint[c] * (1.0 + 0.8 * hue * if c == 1 { -1.0 } else { 1.0 });
                img.push((hit.base[c] + tint * s).clamp(0.0, 1.0) as f32);
            }
            disp.push(d as f32);
            depth.push(hit.depth as f32);
            flow.extend_from_slice(&[hit.velocity[0] as f32, hit.velocity[1] as f32]);
        }
    }
    let raster = Raster { width: w, height: h, data: img };
    SyntheticFrame {
        image: ImageFrame::from_raster(raster, coord),
        disparity: PredictionField {
            width: w,
            height: h,
            kind: FieldKind::Disparity1,
            data: disp,
        },
        depth: DepthMap::new(w, h, depth).expect("plane depths are positive"),
        flow: PredictionField {
            width: w,
            height: h,
            kind: FieldKind::Flow,
            data: flow,
        },
    }
}

/// Renders every camera and time step of one scene.
pub fn generate_scene(scene_id: &str, cfg: &SceneConfig, seed: u64) -> Result<SyntheticScene> {
    let rig = CameraRig::new(cfg.focal_x, cfg.baseline)?;
    let layers = make_layers(cfg, derive(seed, fnv1a64(scene_id.as_bytes())));
    let mut frames = Vec::with_capacity(2 * cfg.time_steps as usize);
    for t in 0..cfg.time_steps {
        for camera in Camera::BOTH {
            frames.push(render_view(cfg, &rig, &layers, camera, t, FrameCoord::new(scene_id, t, camera)));
        }
    }
    Ok(SyntheticScene {
        scene_id: scene_id.into(),
        rig,
        width: cfg.width,
        height: cfg.height,
        frames,
    })
}

/// Ten stereo images (five scenes, one time step) for severity calibration.
///
/// Coarser textures than the default put the reference parameter sets near
/// their published SSIM levels.
pub fn calibration_corpus(seed: u64) -> Result<Vec<SyntheticScene>> {
    let cfg = SceneConfig {
        time_steps: 1,
        texture_scale: 5.0 / 3.0,
        ..SceneConfig::default()
    };
    (0..5).map(|i| generate_scene(&format!("calib{i}"), &cfg, seed)).collect()
}

/// Two scenes with two time steps each: eight frames.
pub fn toy_scenes(seed: u64) -> Result<Vec<SyntheticScene>> {
    let cfg = SceneConfig::default();
    (0..2).map(|i| generate_scene(&format!("scene{i}"), &cfg, seed)).collect()
}
