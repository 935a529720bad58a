//! Little-endian binary codecs for prediction fields (`RSF1`) and pixel
//! masks (`RSM1`).
//!
//! ```text
//! RSF1: "RSF1" | u32 width | u32 height | u32 arity | width*height*arity f32, row-major
//! RSM1: "RSM1" | u32 width | u32 height | ceil(width*height/8) bytes, row-major, LSB-first
//! ```

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{DepthMap, FieldKind, PixelMask, PredictionField};

pub const FIELD_MAGIC: &[u8; 4] = b"RSF1";
pub const MASK_MAGIC: &[u8; 4] = b"RSM1";
const HEADER: usize = 16;

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn field_bytes(width: usize, height: usize, arity: usize, data: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + data.len() * 4);
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(width as u32).to_le_bytes());
    out.extend_from_slice(&(height as u32).to_le_bytes());
    out.extend_from_slice(&(arity as u32).to_le_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Raw decoded RSF1 payload: `(width, height, arity, data)`.
pub fn decode_raw_field(bytes: &[u8]) -> Result<(usize, usize, usize, Vec<f32>)> {
    if bytes.len() < 4 || &bytes[..4] != FIELD_MAGIC {
        return Err(Error::BadMagic { expected: "RSF1" });
    }
    if bytes.len() < HEADER {
        return Err(Error::SizeMismatch {
            expected: HEADER,
            found: bytes.len(),
        });
    }
    let width = read_u32(bytes, 4) as usize;
    let height = read_u32(bytes, 8) as usize;
    let arity = read_u32(bytes, 12) as usize;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(arity))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::InvalidParameter("field header overflows".into()))?;
    let payload = &bytes[HEADER..];
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((width, height, arity, data))
}

pub fn encode_field(field: &PredictionField) -> Vec<u8> {
    field_bytes(field.width, field.height, field.arity(), &field.data)
}

/// Decodes a field and checks its arity against the expected kind.
pub fn decode_field(bytes: &[u8], kind: FieldKind) -> Result<PredictionField> {
    let (width, height, arity, data) = decode_raw_field(bytes)?;
    if arity != kind.arity() {
        return Err(Error::KindMismatch(format!(
            "file has arity {arity}, {kind:?} needs {}",
            kind.arity()
        )));
    }
    PredictionField::new(width, height, kind, data)
}

pub fn encode_depth(depth: &DepthMap) -> Vec<u8> {
    field_bytes(depth.width, depth.height, 1, &depth.data)
}

pub fn decode_depth(bytes: &[u8]) -> Result<DepthMap> {
    let (width, height, arity, data) = decode_raw_field(bytes)?;
    if arity != 1 {
        return Err(Error::KindMismatch(format!("depth file has arity {arity}, needs 1")));
    }
    DepthMap::new(width, height, data)
}

pub fn encode_mask(mask: &PixelMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + mask.bits().len());
    out.extend_from_slice(MASK_MAGIC);
    out.extend_from_slice(&(mask.width() as u32).to_le_bytes());
    out.extend_from_slice(&(mask.height() as u32).to_le_bytes());
    out.extend_from_slice(mask.bits());
    out
}

pub fn decode_mask(bytes: &[u8]) -> Result<PixelMask> {
    if bytes.len() < 4 || &bytes[..4] != MASK_MAGIC {
        return Err(Error::BadMagic { expected: "RSM1" });
    }
    if bytes.len() < 12 {
        return Err(Error::SizeMismatch {
            expected: 12,
            found: bytes.len(),
        });
    }
    let width = read_u32(bytes, 4) as usize;
    let height = read_u32(bytes, 8) as usize;
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::InvalidParameter("mask header overflows".into()))?
        .div_ceil(8);
    if bytes.len() - 12 != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: bytes.len() - 12,
        });
    }
    PixelMask::from_bits(width, height, bytes[12..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn flow_round_trip_is_bit_exact() {
        let data: Vec<f32> = (0..24).map(|i| (i as f32 * 0.731).sin() * 37.0).collect();
        let f = PredictionField::new(4, 3, FieldKind::Flow, data).unwrap();
        let bytes = encode_field(&f);
        assert_eq!(&bytes[..4], b"RSF1");
        assert_eq!(bytes.len(), 16 + 24 * 4);
        let back = decode_field(&bytes, FieldKind::Flow).unwrap();
        assert_eq!(encode_field(&back), bytes);
    }

    #[test]
    fn short_body_is_size_mismatch() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"RSF1");
        for v in [2u32, 2, 1] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        for v in [1.0f32, 2.0, 3.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        assert!(matches!(
            decode_field(&bytes, FieldKind::Disparity1),
            Err(Error::SizeMismatch { expected: 16, found: 12 })
        ));
    }

    #[test]
    fn flow_read_as_disparity_is_kind_mismatch() {
        let f = PredictionField::zeros(2, 2, FieldKind::Flow);
        assert!(matches!(
            decode_field(&encode_field(&f), FieldKind::Disparity1),
            Err(Error::KindMismatch(_))
        ));
    }

    #[test]
    fn bad_magic() {
        assert!(matches!(decode_field(b"XXXX", FieldKind::Flow), Err(Error::BadMagic { .. })));
        assert!(matches!(decode_mask(b"RSF1\0\0\0\0"), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn mask_layout_is_lsb_first() {
        let m = PixelMask::from_fn(3, 3, |x, y| x == y);
        let bytes = encode_mask(&m);
        assert_eq!(&bytes[12..], &[0b0001_0001, 0b1]);
        assert_eq!(decode_mask(&bytes).unwrap(), m);
        assert!(decode_mask(&bytes[..13]).is_err());
    }

    #[test]
    fn depth_uses_arity_one() {
        let d = DepthMap::new(2, 1, vec![1.5, f32::INFINITY]).unwrap();
        assert_eq!(decode_depth(&encode_depth(&d)).unwrap(), d);
    }

    proptest! {
        #[test]
        fn field_bytes_round_trip(w in 1usize..6, h in 1usize..6, flow in any::<bool>(), seed in any::<u32>()) {
            let kind = if flow { FieldKind::Flow } else { FieldKind::Disparity2 };
            let n = w * h * kind.arity();
            let data: Vec<f32> = (0..n).map(|i| f32::from_bits((seed ^ (i as u32).wrapping_mul(2654435761)) & 0x3FFF_FFFF)).collect();
            let f = PredictionField::new(w, h, kind, data).unwrap();
            let bytes = encode_field(&f);
            prop_assert_eq!(decode_field(&bytes, kind).unwrap(), f);
        }

        #[test]
        fn mask_bytes_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            let m = PixelMask::from_fn(w, h, |x, y| (seed >> ((x * 7 + y * 13) % 64)) & 1 == 1);
            prop_assert_eq!(decode_mask(&encode_mask(&m)).unwrap(), m);
        }
    }
}
