//! File formats, manifests, reports and batch commands on top of
//! `densebench-core`.

pub mod commands;
pub mod error;
pub mod files;
pub mod imageio;
pub mod manifest;
pub mod preset;
pub mod report;
pub mod sidecar;

pub use error::{Error, Result};
