//! Severity presets (TOML): one calibrated parameter set per kind.
//!
//! ```toml
//! version = 1
//! [kinds.brightness]
//! theta = 0.46875
//! target = 0.7
//! achieved_ssim = 0.7126
//! converged = true
//! [kinds.brightness.params]
//! kind = "brightness"
//! c = 0.46875
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use densebench_core::calibration::Calibration;
use densebench_core::{CorruptionKind, Params};
use serde::{Deserialize, Serialize};

use crate::error::{self, Error, Result};

pub const PRESET_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetEntry {
    pub theta: f64,
    pub target: f64,
    pub achieved_ssim: f64,
    pub converged: bool,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub version: u32,
    pub kinds: BTreeMap<CorruptionKind, PresetEntry>,
}

impl Default for Preset {
    fn default() -> Self {
        Self {
            version: PRESET_VERSION,
            kinds: BTreeMap::new(),
        }
    }
}

impl Preset {
    pub fn insert(&mut self, calibration: &Calibration, target: f64) {
        let entry = PresetEntry {
            theta: calibration.knob.theta,
            target,
            achieved_ssim: calibration.ssim,
            converged: calibration.converged,
            params: calibration.knob.params(),
        };
        self.kinds.insert(calibration.knob.kind, entry);
    }

    /// Parameters for `kind`: the preset's if present, else the reference set.
    pub fn params(&self, kind: CorruptionKind) -> Params {
        self.kinds
            .get(&kind)
            .map(|e| e.params.clone())
            .unwrap_or_else(|| Params::default_for(kind))
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let p: Preset = toml::from_str(text).map_err(|e| Error::decode(path, e))?;
        if p.version != PRESET_VERSION {
            return Err(Error::Contract(format!("{}: unsupported preset version {}", path.display(), p.version)));
        }
        for (kind, e) in &p.kinds {
            if e.params.kind() != *kind {
                return Err(Error::Contract(format!(
                    "{}: entry {kind} carries {} parameters",
                    path.display(),
                    e.params.kind()
                )));
            }
            e.params.validate().map_err(|err| Error::in_file(path, err))?;
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = String::from_utf8(error::read(path)?).map_err(|e| Error::decode(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("preset fields are TOML-representable")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        error::write(path, self.to_toml().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use densebench_core::calibration::SeverityKnob;

    #[test]
    fn round_trips_every_kind() {
        let mut p = Preset::default();
        for kind in CorruptionKind::ALL {
            let knob = SeverityKnob::new(kind, 0.5).unwrap();
            let c = Calibration {
                knob,
                ssim: 0.7,
                iterations: 3,
                converged: true,
            };
            p.insert(&c, kind.target_ssim());
        }
        let text = p.to_toml();
        let back = Preset::parse(&text, Path::new("p.toml")).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn zero_knob_with_infinite_parameters_round_trips() {
        let mut p = Preset::default();
        for kind in [CorruptionKind::Fog, CorruptionKind::ShotNoise] {
            let c = Calibration {
                knob: SeverityKnob::new(kind, 0.0).unwrap(),
                ssim: 1.0,
                iterations: 0,
                converged: false,
            };
            p.insert(&c, 0.7);
        }
        let back = Preset::parse(&p.to_toml(), Path::new("p.toml")).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn missing_kind_falls_back_to_reference() {
        let p = Preset::default();
        assert_eq!(p.params(CorruptionKind::Brightness), Params::Brightness { c: 0.39 });
    }

    #[test]
    fn mismatched_entry_is_rejected() {
        let text = "version = 1\n[kinds.contrast]\ntheta = 1.0\ntarget = 0.7\nachieved_ssim = 0.7\nconverged = true\n[kinds.contrast.params]\nkind = \"brightness\"\nc = 0.2\n";
        let err = Preset::parse(text, Path::new("bad.toml")).unwrap_err();
        assert!(err.to_string().contains("bad.toml"));
    }
}
