//! World-space particle simulation for snow and rain.
//!
//! Particles live in a frustum slab of the reference (left, first frame)
//! camera, widened sideways by the baseline so the right view is covered.
//! Each particle draws from its own random stream, keyed by its index and
//! respawn generation, so trajectories do not depend on evaluation order.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::types::{CameraRig, Pose};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeatherParams {
    /// Particles per cubic meter.
    pub density: f64,
    /// Fall speed in m/s.
    pub fall_speed: f64,
    /// Relative per-particle fall speed jitter.
    pub fall_jitter: f64,
    /// Wind in world coordinates, m/s.
    pub wind: [f64; 3],
    /// Streak shutter time in seconds (rain).
    pub exposure: f64,
    /// Lateral wobble amplitude in meters (snow).
    pub wobble: f64,
    /// Wobble frequency in Hz.
    pub wobble_frequency: f64,
    /// Particle radius in meters.
    pub radius: f64,
    pub opacity: f64,
    pub color: [f64; 3],
    /// Scene-wide illumination tint and its strength `g`.
    pub tint: [f64; 3],
    pub tint_strength: f64,
    /// Depth range of the spawn slab in meters.
    pub near: f64,
    pub far: f64,
    pub fps: f64,
    /// Simulation substeps per frame interval.
    pub substeps: u32,
}

impl WeatherParams {
    pub fn rain() -> Self {
        Self {
            density: 6000.0,
            fall_speed: 9.0,
            fall_jitter: 0.2,
            wind: [0.0; 3],
            exposure: 0.04,
            wobble: 0.0,
            wobble_frequency: 0.0,
            radius: 0.0008,
            opacity: 0.12,
            color: [0.82, 0.84, 0.88],
            tint: [0.42, 0.46, 0.55],
            tint_strength: 0.12,
            near: 0.5,
            far: 4.5,
            fps: 60.0,
            substeps: 8,
        }
    }

    pub fn snow() -> Self {
        Self {
            density: 2500.0,
            fall_speed: 1.5,
            fall_jitter: 0.3,
            wind: [0.0; 3],
            exposure: 0.0,
            wobble: 0.1,
            wobble_frequency: 0.5,
            radius: 0.004,
            opacity: 0.8,
            color: [0.96, 0.96, 0.98],
            tint: [0.86, 0.89, 0.95],
            tint_strength: 0.15,
            near: 0.5,
            far: 4.5,
            fps: 60.0,
            substeps: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let ok = self.density >= 0.0
            && self.density.is_finite()
            && self.exposure >= 0.0
            && self.exposure.is_finite()
            && self.fall_speed.is_finite()
            && (0.0..1.0).contains(&self.fall_jitter)
            && self.wind.iter().all(|v| v.is_finite())
            && self.wobble >= 0.0
            && self.wobble_frequency >= 0.0
            && self.radius > 0.0
            && unit(self.opacity)
            && self.color.iter().all(|&c| unit(c))
            && self.tint.iter().all(|&c| unit(c))
            && unit(self.tint_strength)
            && self.near > 0.0
            && self.far.is_finite()
            && self.fps > 0.0
            && self.substeps >= 1;
        if !ok {
            return Err(Error::InvalidParameter("weather parameters out of range".into()));
        }
        if self.far <= self.near {
            return Err(Error::InvalidParameter("empty spawn volume: far must exceed near".into()));
        }
        Ok(())
    }
}

/// Frustum slab in reference-camera coordinates: at depth `z` the slab
/// spans `x in [z*x0, z*x1 + extra_x]`, `y in [z*y0, z*y1]` (y down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpawnVolume {
    pub near: f64,
    pub far: f64,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub extra_x: f64,
    /// Camera-to-world placement of the slab.
    pub reference: Pose,
}

impl SpawnVolume {
    /// Slab covering both views of a `width x height` rig image.
    pub fn for_rig(rig: &CameraRig, width: usize, height: usize, near: f64, far: f64, reference: Pose) -> Result<Self> {
        rig.validate()?;
        if !(far > near && near > 0.0) {
            return Err(Error::InvalidParameter("empty spawn volume: far must exceed near".into()));
        }
        let [cx, cy] = rig.principal(width, height);
        let (fx, fy) = (rig.focal_x, rig.focal_y());
        Ok(Self {
            near,
            far,
            x0: (-0.5 - cx) / fx,
            x1: (width as f64 - 0.5 - cx) / fx,
            y0: (-0.5 - cy) / fy,
            y1: (height as f64 - 0.5 - cy) / fy,
            extra_x: rig.baseline,
            reference,
        })
    }

    fn width_at(&self, z: f64) -> f64 {
        z * (self.x1 - self.x0) + self.extra_x
    }

    fn height_at(&self, z: f64) -> f64 {
        z * (self.y1 - self.y0)
    }

    /// Volume in cubic meters.
    pub fn volume(&self) -> f64 {
        let (n, f) = (self.near, self.far);
        (self.y1 - self.y0) * ((self.x1 - self.x0) * (f * f * f - n * n * n) / 3.0 + self.extra_x * (f * f - n * n) / 2.0)
    }

    pub fn contains_camera(&self, p: [f64; 3]) -> bool {
        let z = p[2];
        z >= self.near
            && z <= self.far
            && p[0] >= z * self.x0
            && p[0] <= z * self.x1 + self.extra_x
            && p[1] >= z * self.y0 - 1e-9
            && p[1] <= z * self.y1
    }

    /// Depth sampled with density proportional to `weight(z)`, which must
    /// be increasing in `z`.
    fn sample_depth(&self, rng: &mut impl Rng, weight: impl Fn(f64) -> f64) -> f64 {
        let top = weight(self.far);
        loop {
            let z = self.near + (self.far - self.near) * rng.random::<f64>();
            if rng.random::<f64>() * top <= weight(z) {
                return z;
            }
        }
    }

    /// Uniform point inside the slab, in camera coordinates.
    pub fn sample_inside(&self, rng: &mut impl Rng) -> [f64; 3] {
        let z = self.sample_depth(rng, |z| self.width_at(z) * self.height_at(z));
        let x = z * self.x0 + self.width_at(z) * rng.random::<f64>();
        let y = z * self.y0 + self.height_at(z) * rng.random::<f64>();
        [x, y, z]
    }

    /// Uniform point on the top face of the slab, in camera coordinates.
    pub fn sample_top(&self, rng: &mut impl Rng) -> [f64; 3] {
        let z = self.sample_depth(rng, |z| self.width_at(z));
        let x = z * self.x0 + self.width_at(z) * rng.random::<f64>();
        [x, z * self.y0, z]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    /// World position in meters.
    pub position: [f64; 3],
    /// World fall velocity in m/s, wind excluded.
    pub velocity: [f64; 3],
    pub radius: f64,
    pub opacity: f64,
    /// Wobble phase in radians.
    pub phase: f64,
    /// Number of respawns so far.
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleField {
    pub particles: Vec<Particle>,
    pub seed: u64,
    pub volume: SpawnVolume,
}

/// Snapshots of a field at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<ParticleField>,
}

fn particle_rng(seed: u64, index: usize, generation: u32) -> rand_chacha::ChaCha8Rng {
    seed::rng(seed::derive(seed::derive(seed, index as u64), generation as u64))
}

fn wobble_offset(p: &WeatherParams, phase: f64, t: f64) -> [f64; 3] {
    if p.wobble == 0.0 {
        return [0.0; 3];
    }
    let a = core::f64::consts::TAU * p.wobble_frequency * t + phase;
    [p.wobble * libm::sin(a), 0.0, 0.5 * p.wobble * libm::cos(a)]
}

fn spawn(p: &WeatherParams, vol: &SpawnVolume, seed: u64, index: usize, generation: u32) -> Particle {
    let mut rng = particle_rng(seed, index, generation);
    let cam = if generation == 0 {
        vol.sample_inside(&mut rng)
    } else {
        vol.sample_top(&mut rng)
    };
    let speed = p.fall_speed * (1.0 + p.fall_jitter * (2.0 * rng.random::<f64>() - 1.0));
    Particle {
        position: vol.reference.inverse_transform(cam),
        velocity: [0.0, -speed, 0.0],
        radius: p.radius,
        opacity: p.opacity,
        phase: core::f64::consts::TAU * rng.random::<f64>(),
        generation,
    }
}

/// Number of particles for a volume: `round(density * volume)`.
pub fn particle_count(p: &WeatherParams, vol: &SpawnVolume) -> usize {
    libm::round(p.density * vol.volume()) as usize
}

/// Initial uniform population of the slab.
pub fn spawn_field(p: &WeatherParams, vol: &SpawnVolume, seed: u64) -> ParticleField {
    let n = particle_count(p, vol);
    ParticleField {
        particles: (0..n).map(|i| spawn(p, vol, seed, i, 0)).collect(),
        seed,
        volume: *vol,
    }
}

/// Advances every particle from `t` to `t + dt`; particles that leave the
/// slab respawn on its top face.
pub fn step_field(field: &mut ParticleField, p: &WeatherParams, t: f64, dt: f64) {
    let vol = field.volume;
    let seed = field.seed;
    for (i, q) in field.particles.iter_mut().enumerate() {
        let w0 = wobble_offset(p, q.phase, t);
        let w1 = wobble_offset(p, q.phase, t + dt);
        for k in 0..3 {
            q.position[k] += (q.velocity[k] + p.wind[k]) * dt + (w1[k] - w0[k]);
        }
        if !vol.contains_camera(vol.reference.transform(q.position)) {
            *q = spawn(p, &vol, seed, i, q.generation + 1);
        }
    }
}

/// Simulates `steps` Euler substeps from `t0` to `t1` and keeps all
/// `steps + 1` snapshots.
pub fn simulate_particles(
    p: &WeatherParams,
    vol: &SpawnVolume,
    seed: u64,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<Trajectory> {
    p.validate()?;
    if steps < 2 {
        return Err(Error::InvalidParameter("simulation needs at least 2 steps".into()));
    }
    let volume = vol.volume();
    if volume.is_nan() || volume <= 0.0 {
        return Err(Error::InvalidParameter("empty spawn volume".into()));
    }
    let dt = (t1 - t0) / steps as f64;
    let mut field = spawn_field(p, vol, seed);
    let mut times = Vec::with_capacity(steps + 1);
    let mut fields = Vec::with_capacity(steps + 1);
    times.push(t0);
    fields.push(field.clone());
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        step_field(&mut field, p, t, dt);
        times.push(t + dt);
        fields.push(field.clone());
    }
    Ok(Trajectory { times, fields })
}
