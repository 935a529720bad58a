//! Depth-tested particle rasterization with weighted order-independent
//! transparency.
//!
//! Fragments accumulate `A = sum(alpha)` and `C = sum(alpha * color)` per
//! pixel. The composite over the background `I` is `C + (1 - A) * I` when
//! `A <= 1` and `C / A` otherwise, followed by the scene-wide illumination
//! tint `(1 - g) * out + g * tint`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dims, Error, Result};
use crate::scene::particles::{ParticleField, Trajectory, WeatherParams};
use crate::types::{CameraRig, DepthMap, Pose, Raster};

/// Fragments farther than the scene depth by more than this are hidden.
pub const DEPTH_EPSILON: f64 = 1e-3;

/// Pinhole view of one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View {
    pub pose: Pose,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl View {
    pub fn new(rig: &CameraRig, pose: Pose, width: usize, height: usize) -> Self {
        let [cx, cy] = rig.principal(width, height);
        Self {
            pose,
            fx: rig.focal_x,
            fy: rig.focal_y(),
            cx,
            cy,
            width,
            height,
        }
    }

    #[inline]
    fn project_camera(&self, c: [f64; 3]) -> Option<[f64; 3]> {
        (c[2] > 1e-6).then(|| [self.cx + self.fx * c[0] / c[2], self.cy + self.fy * c[1] / c[2], c[2]])
    }

    /// `(u, v, z)` of a world point, `None` behind the camera.
    pub fn project(&self, world: [f64; 3]) -> Option<[f64; 3]> {
        self.project_camera(self.pose.transform(world))
    }
}

/// How particles are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Discs at the frame time.
    Sprite,
    /// Connected substep positions over the exposure window.
    Streak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderStats {
    /// Fragments that passed the depth test.
    pub fragments: u64,
}

/// Per-pixel blend sums for one view.
#[derive(Debug, Clone)]
pub struct Accumulator {
    width: usize,
    height: usize,
    alpha: Vec<f64>,
    color: Vec<[f64; 3]>,
    pub stats: RenderStats,
}

impl Accumulator {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            alpha: vec![0.0; width * height],
            color: vec![[0.0; 3]; width * height],
            stats: RenderStats::default(),
        }
    }

    #[inline]
    fn deposit(&mut self, depth: &DepthMap, x: f64, y: f64, z: f64, alpha: f64, color: [f64; 3]) {
        if alpha <= 0.0 {
            return;
        }
        let (xi, yi) = (libm::round(x), libm::round(y));
        if xi < 0.0 || yi < 0.0 || xi >= self.width as f64 || yi >= self.height as f64 {
            return;
        }
        let i = yi as usize * self.width + xi as usize;
        if z > depth.data[i] as f64 + DEPTH_EPSILON {
            return;
        }
        self.alpha[i] += alpha;
        for (acc, c) in self.color[i].iter_mut().zip(color) {
            *acc += alpha * c;
        }
        self.stats.fragments += 1;
    }

    /// Antialiased disc; sub-pixel discs become one fragment weighted by
    /// their area.
    pub fn sprite(&mut self, view: &View, depth: &DepthMap, world: [f64; 3], radius: f64, opacity: f64, color: [f64; 3]) {
        let Some([u, v, z]) = view.project(world) else {
            return;
        };
        let r = radius * view.fx / z;
        if r < 0.5 {
            let area = core::f64::consts::PI * r * r;
            self.deposit(depth, u, v, z, opacity * area.min(1.0), color);
            return;
        }
        let (x0, x1) = (libm::floor(u - r - 1.0), libm::ceil(u + r + 1.0));
        let (y0, y1) = (libm::floor(v - r - 1.0), libm::ceil(v + r + 1.0));
        let mut y = y0;
        while y <= y1 {
            let mut x = x0;
            while x <= x1 {
                let d = libm::hypot(x - u, y - v);
                let cover = (r + 0.5 - d).clamp(0.0, 1.0);
                if cover > 0.0 {
                    self.deposit(depth, x, y, z, opacity * cover, color);
                }
                x += 1.0;
            }
            y += 1.0;
        }
    }

    /// Segment between two world points, sampled about once per pixel of
    /// projected length; thin streaks scale alpha by their width.
    #[allow(clippy::too_many_arguments)]
    pub fn streak(&mut self, view: &View, depth: &DepthMap, a: [f64; 3], b: [f64; 3], radius: f64, opacity: f64, color: [f64; 3]) {
        let ca = view.pose.transform(a);
        let cb = view.pose.transform(b);
        let (Some(pa), Some(pb)) = (view.project_camera(ca), view.project_camera(cb)) else {
            return;
        };
        let len = libm::hypot(pb[0] - pa[0], pb[1] - pa[1]);
        let n = (libm::ceil(len) as usize).max(1);
        let seg = len / n as f64;
        let (nx, ny) = if len > 0.0 {
            (-(pb[1] - pa[1]) / len, (pb[0] - pa[0]) / len)
        } else {
            (1.0, 0.0)
        };
        for i in 0..n {
            let s = (i as f64 + 0.5) / n as f64;
            let c = [ca[0] + s * (cb[0] - ca[0]), ca[1] + s * (cb[1] - ca[1]), ca[2] + s * (cb[2] - ca[2])];
            let Some([u, v, z]) = view.project_camera(c) else {
                continue;
            };
            let w = 2.0 * radius * view.fx / z;
            let k = (libm::round(w) as usize).max(1);
            let alpha = opacity * (w / k as f64).min(1.0) * seg;
            for j in 0..k {
                let off = j as f64 - (k - 1) as f64 * 0.5;
                self.deposit(depth, u + off * nx, v + off * ny, z, alpha, color);
            }
        }
    }

    /// Blends the sums over `bg` and applies the illumination tint.
    pub fn composite(&self, bg: &Raster, tint: [f64; 3], strength: f64) -> Raster {
        let mut out = bg.clone();
        for (i, px) in out.data.chunks_exact_mut(3).enumerate() {
            let a = self.alpha[i];
            if a > 0.0 {
                let c = self.color[i];
                for k in 0..3 {
                    px[k] = if a <= 1.0 {
                        (c[k] + (1.0 - a) * px[k] as f64) as f32
                    } else {
                        (c[k] / a) as f32
                    };
                }
            }
            if strength > 0.0 {
                for k in 0..3 {
                    px[k] = ((1.0 - strength) * px[k] as f64 + strength * tint[k]) as f32;
                }
            }
        }
        out
    }
}

/// Draws every particle of `field` as a sprite.
pub fn splat_sprites(acc: &mut Accumulator, view: &View, depth: &DepthMap, field: &ParticleField, p: &WeatherParams) {
    for q in &field.particles {
        acc.sprite(view, depth, q.position, q.radius, q.opacity, p.color);
    }
}

/// Draws the part of each particle's `prev -> cur` step that falls inside
/// the exposure window starting at `window_start`. Respawned particles are
/// skipped for that step.
#[allow(clippy::too_many_arguments)]
pub fn splat_step(
    acc: &mut Accumulator,
    view: &View,
    depth: &DepthMap,
    prev: &ParticleField,
    cur: &ParticleField,
    t_prev: f64,
    t_cur: f64,
    window_start: f64,
    p: &WeatherParams,
) {
    if t_cur <= window_start {
        return;
    }
    let s0 = ((window_start - t_prev) / (t_cur - t_prev)).max(0.0);
    for (a, b) in prev.particles.iter().zip(&cur.particles) {
        if a.generation != b.generation {
            continue;
        }
        let start = [
            a.position[0] + s0 * (b.position[0] - a.position[0]),
            a.position[1] + s0 * (b.position[1] - a.position[1]),
            a.position[2] + s0 * (b.position[2] - a.position[2]),
        ];
        acc.streak(view, depth, start, b.position, b.radius, b.opacity, p.color);
    }
}

/// Renders a precomputed trajectory into one view at time `time`: sprites
/// use the last snapshot at or before `time`; streaks use every step
/// overlapping `[time - exposure, time]`.
pub fn render_particles(
    img: &Raster,
    depth: &DepthMap,
    traj: &Trajectory,
    p: &WeatherParams,
    style: Style,
    view: &View,
    time: f64,
) -> Result<(Raster, RenderStats)> {
    check_dims(img.dims(), depth.dims())?;
    check_dims(img.dims(), (view.width, view.height))?;
    if traj.fields.is_empty() {
        return Err(Error::InvalidParameter("empty trajectory".into()));
    }
    let mut acc = Accumulator::new(img.width, img.height);
    let last = traj.times.iter().rposition(|&t| t <= time + 1e-12).unwrap_or(0);
    match style {
        Style::Sprite => splat_sprites(&mut acc, view, depth, &traj.fields[last], p),
        Style::Streak => {
            let start = time - p.exposure;
            for k in 1..=last {
                splat_step(
                    &mut acc,
                    view,
                    depth,
                    &traj.fields[k - 1],
                    &traj.fields[k],
                    traj.times[k - 1],
                    traj.times[k],
                    start,
                    p,
                );
            }
        }
    }
    Ok((acc.composite(img, p.tint, p.tint_strength), acc.stats))
}
