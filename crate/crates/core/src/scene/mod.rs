//! Corruptions driven by scene geometry and motion.

pub mod fog;
pub mod motion;
pub mod particles;
pub mod render;
pub mod weather;

pub use fog::{fog, transmission, FogParams};
pub use motion::motion_blur;
pub use particles::{simulate_particles, ParticleField, SpawnVolume, Trajectory, WeatherParams};
pub use render::{render_particles, RenderStats, Style, View};
pub use weather::{corrupt_weather, render_weather_frame, PoseTrack, RenderJob, WeatherSim};
