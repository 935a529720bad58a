//! Provenance sidecars written next to every corrupted frame.
//!
//! Schema version 1 (TOML). Seeds are hex strings because TOML integers are
//! signed 64-bit.
//!
//! ```toml
//! schema = 1
//! kind = "glass_blur"
//! scene_id = "scene0"
//! camera = "left"
//! time_index = 0
//! master_seed = "0x0000000000000007"
//! stream_seed = "0x9e3779b97f4a7c15"
//! pattern = "0x..."              # optional
//! [consistency]
//! time = true
//! stereo = false
//! depth = false
//! [params]
//! kind = "glass_blur"
//! sigma = 1.2
//! iterations = 1
//! radius = 3.0
//! ```

use std::path::Path;

use densebench_core::{Camera, Consistency, CorruptionKind, FrameCoord, Params, Provenance};
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

pub const SIDECAR_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema: u32,
    pub kind: CorruptionKind,
    pub scene_id: String,
    pub camera: Camera,
    pub time_index: u32,
    pub master_seed: String,
    pub stream_seed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub consistency: Consistency,
    pub params: Params,
}

fn hex(v: u64) -> String {
    format!("{v:#018x}")
}

fn unhex(s: &str, path: &Path) -> Result<u64> {
    s.strip_prefix("0x")
        .and_then(|h| u64::from_str_radix(h, 16).ok())
        .ok_or_else(|| Error::decode(path, format!("bad seed {s:?}")))
}

impl Sidecar {
    pub fn new(p: &Provenance, master_seed: u64) -> Self {
        Self {
            schema: SIDECAR_SCHEMA,
            kind: p.kind(),
            scene_id: p.coord.scene_id.clone(),
            camera: p.coord.camera,
            time_index: p.coord.time_index,
            master_seed: hex(master_seed),
            stream_seed: hex(p.stream_seed),
            pattern: p.pattern.map(hex),
            consistency: p.consistency,
            params: p.params.clone(),
        }
    }

    pub fn provenance(&self, path: &Path) -> Result<Provenance> {
        Ok(Provenance {
            coord: FrameCoord::new(self.scene_id.clone(), self.time_index, self.camera),
            params: self.params.clone(),
            consistency: self.consistency,
            stream_seed: unhex(&self.stream_seed, path)?,
            pattern: self.pattern.as_deref().map(|s| unhex(s, path)).transpose()?,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("sidecar fields are TOML-representable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = String::from_utf8(error::read(path)?).map_err(|e| Error::decode(path, e))?;
        let s: Sidecar = toml::from_str(&text).map_err(|e| Error::decode(path, e))?;
        if s.schema != SIDECAR_SCHEMA {
            return Err(Error::Contract(format!("{}: unsupported sidecar schema {}", path.display(), s.schema)));
        }
        Ok(s)
    }
}
