//! Files written by the crate read back unchanged.

use densebench::files::{read_field, read_mask, write_field, write_mask};
use densebench::sidecar::Sidecar;
use densebench_core::{Camera, Consistency, CorruptionKind, FieldKind, FrameCoord, Params, PixelMask, PredictionField, Provenance};
use proptest::prelude::*;

fn field_kind(i: u8) -> FieldKind {
    [FieldKind::Flow, FieldKind::Disparity1, FieldKind::Disparity2][i as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_files(w in 1usize..20, h in 1usize..20, k in 0u8..3, seed in any::<u64>()) {
        let kind = field_kind(k);
        let arity = if kind == FieldKind::Flow { 2 } else { 1 };
        let data: Vec<f32> = (0..w * h * arity)
            .map(|i| f32::from_bits((seed.rotate_left(i as u32 % 64) as u32) & 0x7f7f_ffff))
            .collect();
        let f = PredictionField::new(w, h, kind, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b.rsf");
        write_field(&f, &path).unwrap();
        prop_assert_eq!(read_field(&path, kind).unwrap(), f);
    }

    #[test]
    fn mask_files(w in 1usize..40, h in 1usize..40, bits in any::<u64>()) {
        let m = PixelMask::from_fn(w, h, |x, y| (bits >> ((x * 7 + y * 13) % 64)) & 1 == 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.rsm");
        write_mask(&m, &path).unwrap();
        prop_assert_eq!(read_mask(&path).unwrap(), m);
    }

    #[test]
    fn sidecars_keep_full_seeds(master in any::<u64>(), stream in any::<u64>(), pattern in proptest::option::of(any::<u64>()), t in 0u32..10_000) {
        let p = Provenance {
            coord: FrameCoord::new("scene", t, Camera::Right),
            params: Params::default_for(CorruptionKind::Spatter),
            consistency: CorruptionKind::Spatter.consistency(),
            stream_seed: stream,
            pattern,
        };
        let s = Sidecar::new(&p, master);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        std::fs::write(&path, s.to_toml()).unwrap();
        let back = Sidecar::load(&path).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.provenance(&path).unwrap(), p);
        prop_assert_eq!(back.consistency, Consistency { time: true, stereo: false, depth: false });
    }
}
