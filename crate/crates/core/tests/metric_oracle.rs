//! Metrics against a naive per-pixel loop written independently of the
//! library.

use densebench_core::metrics::{accuracy, robustness, MetricKind};
use densebench_core::{FieldKind, PixelMask, PredictionField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const W: usize = 8;
const H: usize = 8;
const PAIRS: usize = 200;
const REL_TOL: f64 = 1e-9;

fn oracle(reference: &PredictionField, other: &PredictionField, mask: &PixelMask, metric: MetricKind) -> f64 {
    let arity = if reference.kind == FieldKind::Flow { 2 } else { 1 };
    let mut total = 0.0;
    let mut n = 0usize;
    for y in 0..H {
        for x in 0..W {
            if !mask.contains(x, y) {
                continue;
            }
            let i = y * W + x;
            let mut d2 = 0.0;
            let mut r2 = 0.0;
            for c in 0..arity {
                let r = reference.data[i * arity + c] as f64;
                let o = other.data[i * arity + c] as f64;
                d2 += (o - r) * (o - r);
                r2 += r * r;
            }
            let err = d2.sqrt();
            let refn = r2.sqrt();
            total += match metric {
                MetricKind::Epe | MetricKind::Abs => err,
                MetricKind::OnePx => {
                    if err > 1.0 {
                        100.0
                    } else {
                        0.0
                    }
                }
                MetricKind::Fl | MetricKind::D1 | MetricKind::D2 => {
                    if err > 3.0 && err > 0.05 * refn {
                        100.0
                    } else {
                        0.0
                    }
                }
            };
            n += 1;
        }
    }
    total / n as f64
}

fn random_field(rng: &mut ChaCha8Rng, kind: FieldKind, integer: bool) -> PredictionField {
    let arity = if kind == FieldKind::Flow { 2 } else { 1 };
    let data = (0..W * H * arity)
        .map(|_| {
            if integer {
                rng.random_range(-6i32..=6) as f32
            } else {
                rng.random_range(-80.0f32..80.0)
            }
        })
        .collect();
    PredictionField::new(W, H, kind, data).unwrap()
}

/// Either a small perturbation of `base` (to populate the thresholds) or an
/// unrelated field.
fn partner(rng: &mut ChaCha8Rng, base: &PredictionField, integer: bool) -> PredictionField {
    if rng.random_bool(0.5) {
        return random_field(rng, base.kind, integer);
    }
    let data = base
        .data
        .iter()
        .map(|&v| {
            if integer {
                v + rng.random_range(-4i32..=4) as f32
            } else {
                v + rng.random_range(-5.0f32..5.0)
            }
        })
        .collect();
    PredictionField::new(W, H, base.kind, data).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn every_metric_matches_the_loop_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let kinds = [FieldKind::Flow, FieldKind::Disparity1, FieldKind::Disparity2];
    let mut checked = 0;
    for pair in 0..PAIRS {
        let kind = kinds[pair % kinds.len()];
        let integer = pair % 2 == 0;
        let clean = random_field(&mut rng, kind, integer);
        let corrupt = partner(&mut rng, &clean, integer);
        let mask = if pair % 5 == 0 {
            PixelMask::full(W, H)
        } else {
            let mut m = PixelMask::from_fn(W, H, |_, _| rng.random_bool(0.6));
            m.set_index(rng.random_range(0..W * H), true);
            m
        };
        for metric in MetricKind::ALL.into_iter().filter(|m| m.accepts(kind)) {
            let got = robustness(&clean, &corrupt, &mask, metric).unwrap();
            let want = oracle(&clean, &corrupt, &mask, metric);
            assert!(close(got, want), "pair {pair} {metric}: {got} vs oracle {want}");
            let got = accuracy(&corrupt, &clean, &mask, metric).unwrap();
            assert!(close(got, want), "pair {pair} accuracy {metric}: {got} vs oracle {want}");
            checked += 1;
        }
    }
    assert!(checked >= PAIRS * 3);
}

#[test]
fn uniform_unit_error_sits_on_the_strict_boundary() {
    let gt = PredictionField::zeros(W, H, FieldKind::Flow);
    let pred = PredictionField::from_fn(W, H, FieldKind::Flow, |_, _| [0.0, 1.0]);
    let m = PixelMask::full(W, H);
    assert_eq!(accuracy(&pred, &gt, &m, MetricKind::Epe).unwrap(), 1.0);
    assert_eq!(accuracy(&pred, &gt, &m, MetricKind::OnePx).unwrap(), 0.0);
}
