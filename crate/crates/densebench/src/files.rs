//! Field, depth and mask files.

use std::path::Path;

use densebench_core::format;
use densebench_core::{DepthMap, FieldKind, PixelMask, PredictionField};

use crate::error::{self, Error, Result};

pub fn read_field(path: &Path, kind: FieldKind) -> Result<PredictionField> {
    format::decode_field(&error::read(path)?, kind).map_err(|e| Error::in_file(path, e))
}

pub fn write_field(field: &PredictionField, path: &Path) -> Result<()> {
    error::write(path, &format::encode_field(field))
}

pub fn read_depth(path: &Path) -> Result<DepthMap> {
    format::decode_depth(&error::read(path)?).map_err(|e| Error::in_file(path, e))
}

pub fn write_depth(depth: &DepthMap, path: &Path) -> Result<()> {
    error::write(path, &format::encode_depth(depth))
}

pub fn read_mask(path: &Path) -> Result<PixelMask> {
    format::decode_mask(&error::read(path)?).map_err(|e| Error::in_file(path, e))
}

pub fn write_mask(mask: &PixelMask, path: &Path) -> Result<()> {
    error::write(path, &format::encode_mask(mask))
}
