//! Clean-vs-corrupt robustness and clean-vs-ground-truth accuracy.
//!
//! For a reference field `r` and a compared field `f` over the pixels of a
//! mask, with `e = f - r`:
//!
//! | metric | value |
//! |---|---|
//! | EPE | mean of `|e|` (flow) |
//! | 1px | percentage with `|e| > 1` |
//! | Fl, D1, D2 | percentage with `|e| > 3` and `|e| > 0.05 * |r|` |
//! | Abs | mean of `|e|` (disparity) |

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{check_dims, Error, Result};
use crate::types::{FieldKind, PixelMask, PredictionField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MetricKind {
    #[cfg_attr(feature = "serde", serde(rename = "epe"))]
    Epe,
    #[cfg_attr(feature = "serde", serde(rename = "1px"))]
    OnePx,
    #[cfg_attr(feature = "serde", serde(rename = "fl"))]
    Fl,
    #[cfg_attr(feature = "serde", serde(rename = "abs"))]
    Abs,
    #[cfg_attr(feature = "serde", serde(rename = "d1"))]
    D1,
    #[cfg_attr(feature = "serde", serde(rename = "d2"))]
    D2,
}

/// Absolute outlier threshold of Fl/D1/D2 in pixels.
pub const OUTLIER_ABS: f64 = 3.0;
/// Relative outlier threshold of Fl/D1/D2.
pub const OUTLIER_REL: f64 = 0.05;

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Epe,
        MetricKind::OnePx,
        MetricKind::Fl,
        MetricKind::Abs,
        MetricKind::D1,
        MetricKind::D2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Epe => "epe",
            MetricKind::OnePx => "1px",
            MetricKind::Fl => "fl",
            MetricKind::Abs => "abs",
            MetricKind::D1 => "d1",
            MetricKind::D2 => "d2",
        }
    }

    pub fn parse(s: &str) -> Option<MetricKind> {
        let lower = s.to_ascii_lowercase();
        Self::ALL.into_iter().find(|m| m.name() == lower)
    }

    pub fn is_percentage(self) -> bool {
        matches!(self, MetricKind::OnePx | MetricKind::Fl | MetricKind::D1 | MetricKind::D2)
    }

    /// Whether the metric is defined on fields of `kind`.
    pub fn accepts(self, kind: FieldKind) -> bool {
        match self {
            MetricKind::Epe | MetricKind::Fl => kind == FieldKind::Flow,
            MetricKind::OnePx => true,
            MetricKind::Abs => kind != FieldKind::Flow,
            MetricKind::D1 => kind == FieldKind::Disparity1,
            MetricKind::D2 => kind == FieldKind::Disparity2,
        }
    }

    /// Contribution of one pixel: a distance for EPE/Abs, 0 or 1 for the
    /// outlier metrics.
    #[inline]
    pub fn pixel_term(self, err: f64, reference_norm: f64) -> f64 {
        match self {
            MetricKind::Epe | MetricKind::Abs => err,
            MetricKind::OnePx => (err > 1.0) as u8 as f64,
            MetricKind::Fl | MetricKind::D1 | MetricKind::D2 => {
                (err > OUTLIER_ABS && err > OUTLIER_REL * reference_norm) as u8 as f64
            }
        }
    }

    /// Converts a mean pixel term to the reported unit.
    #[inline]
    pub fn finish(self, mean: f64) -> f64 {
        if self.is_percentage() {
            100.0 * mean
        } else {
            mean
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mergeable sum of pixel terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSum {
    pub sum: f64,
    pub count: u64,
}

impl MetricSum {
    pub fn merge(self, other: MetricSum) -> MetricSum {
        MetricSum {
            sum: self.sum + other.sum,
            count: self.count + other.count,
        }
    }

    /// Final value in reported units.
    pub fn value(&self, metric: MetricKind) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptyMask);
        }
        Ok(metric.finish(self.sum / self.count as f64))
    }
}

fn check_pair(reference: &PredictionField, other: &PredictionField, mask: &PixelMask, metric: MetricKind) -> Result<()> {
    check_dims(reference.dims(), other.dims())?;
    check_dims(reference.dims(), mask.dims())?;
    if reference.kind != other.kind {
        return Err(Error::KindMismatch(format!(
            "cannot compare {:?} with {:?}",
            reference.kind, other.kind
        )));
    }
    if !metric.accepts(reference.kind) {
        return Err(Error::KindMismatch(format!("{metric} is not defined on {:?} fields", reference.kind)));
    }
    Ok(())
}

/// Sum of pixel terms over the mask, in row-major order.
pub fn metric_sum(reference: &PredictionField, other: &PredictionField, mask: &PixelMask, metric: MetricKind) -> Result<MetricSum> {
    check_pair(reference, other, mask, metric)?;
    let a = reference.arity();
    let mut acc = MetricSum::default();
    for i in mask.indices() {
        let r = &reference.data[i * a..(i + 1) * a];
        let o = &other.data[i * a..(i + 1) * a];
        let (err, norm) = if a == 2 {
            (
                libm::hypot(o[0] as f64 - r[0] as f64, o[1] as f64 - r[1] as f64),
                libm::hypot(r[0] as f64, r[1] as f64),
            )
        } else {
            ((o[0] as f64 - r[0] as f64).abs(), (r[0] as f64).abs())
        };
        acc.sum += metric.pixel_term(err, norm);
        acc.count += 1;
    }
    Ok(acc)
}

/// Corruption robustness: distance between the clean prediction (the
/// reference) and the corrupted one.
pub fn robustness(clean: &PredictionField, corrupt: &PredictionField, mask: &PixelMask, metric: MetricKind) -> Result<f64> {
    metric_sum(clean, corrupt, mask, metric)?.value(metric)
}

/// Accuracy against ground truth; the ground truth is the reference.
pub fn accuracy(pred: &PredictionField, gt: &PredictionField, mask: &PixelMask, metric: MetricKind) -> Result<f64> {
    metric_sum(gt, pred, mask, metric)?.value(metric)
}

/// Average and median of a set of per-corruption values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub average: f64,
    pub median: f64,
}

/// Arithmetic mean and standard median (mean of the two middle values for
/// even counts).
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("summary needs at least one value".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("summary values must not be NaN".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    // Summing in sorted order makes the mean independent of row order.
    let average = sorted.iter().sum::<f64>() / n as f64;
    Ok(Summary { average, median })
}

/// One corruption's values, one per report metric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportRow {
    pub corruption: String,
    pub values: Vec<f64>,
}

/// Corruption-by-metric table of one model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobustnessReport {
    pub model: String,
    pub metrics: Vec<MetricKind>,
    pub rows: Vec<ReportRow>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub clean_error: Option<Vec<f64>>,
}

impl RobustnessReport {
    pub fn new(model: impl Into<String>, metrics: Vec<MetricKind>) -> Self {
        Self {
            model: model.into(),
            metrics,
            rows: Vec::new(),
            clean_error: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if r.values.len() != self.metrics.len() {
                return Err(Error::Ragged(format!(
                    "row {} has {} values for {} metrics",
                    r.corruption,
                    r.values.len(),
                    self.metrics.len()
                )));
            }
        }
        if let Some(c) = &self.clean_error {
            if c.len() != self.metrics.len() {
                return Err(Error::Ragged("clean error row length differs from metric count".into()));
            }
        }
        Ok(())
    }

    pub fn metric_index(&self, metric: MetricKind) -> Option<usize> {
        self.metrics.iter().position(|&m| m == metric)
    }

    /// Per-corruption column of one metric.
    pub fn column(&self, metric: MetricKind) -> Result<Vec<(String, f64)>> {
        let j = self
            .metric_index(metric)
            .ok_or_else(|| Error::MissingInput(format!("report for {} has no {metric} column", self.model)))?;
        Ok(self.rows.iter().map(|r| (r.corruption.clone(), r.values[j])).collect())
    }

    /// Average and median rows, one entry per metric.
    pub fn summary(&self) -> Result<Vec<Summary>> {
        self.validate()?;
        (0..self.metrics.len())
            .map(|j| summarize(&self.rows.iter().map(|r| r.values[j]).collect::<Vec<_>>()))
            .collect()
    }
}

/// Robustness on a subsampled mask next to the full-frame value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleGap {
    pub subsampled: f64,
    pub full: f64,
    pub relative_gap: f64,
    /// The gap exceeds [`GAP_FLAG`]; the estimator is unreliable for this
    /// input (for example a few hot pixels).
    pub flagged: bool,
}

pub const GAP_FLAG: f64 = 0.02;

pub fn robustness_subsampled_vs_full(
    clean: &PredictionField,
    corrupt: &PredictionField,
    mask: &PixelMask,
    metric: MetricKind,
) -> Result<SubsampleGap> {
    let subsampled = robustness(clean, corrupt, mask, metric)?;
    let full = robustness(clean, corrupt, &PixelMask::full(clean.width, clean.height), metric)?;
    let relative_gap = (subsampled - full).abs() / full.max(1e-12);
    Ok(SubsampleGap {
        subsampled,
        full,
        relative_gap,
        flagged: relative_gap > GAP_FLAG,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn flow(w: usize, h: usize, f: impl FnMut(usize, usize) -> [f32; 2]) -> PredictionField {
        PredictionField::from_fn(w, h, FieldKind::Flow, f)
    }

    #[test]
    fn identical_fields_score_zero() {
        let a = flow(5, 4, |x, y| [x as f32, -(y as f32)]);
        let m = PixelMask::full(5, 4);
        for metric in [MetricKind::Epe, MetricKind::OnePx, MetricKind::Fl] {
            assert_eq!(robustness(&a, &a, &m, metric).unwrap(), 0.0);
        }
        let d = PredictionField::from_fn(5, 4, FieldKind::Disparity1, |x, _| [x as f32, 0.0]);
        for metric in [MetricKind::Abs, MetricKind::OnePx, MetricKind::D1] {
            assert_eq!(robustness(&d, &d, &m, metric).unwrap(), 0.0);
        }
    }

    #[test]
    fn three_four_five() {
        let a = flow(6, 3, |x, y| [x as f32, y as f32]);
        let b = flow(6, 3, |x, y| [x as f32 + 3.0, y as f32 + 4.0]);
        let m = PixelMask::full(6, 3);
        assert!((robustness(&a, &b, &m, MetricKind::Epe).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(robustness(&a, &b, &m, MetricKind::OnePx).unwrap(), 100.0);
    }

    #[test]
    fn fl_uses_relative_threshold_of_reference() {
        let clean = flow(4, 4, |_, _| [100.0, 0.0]);
        let corrupt = flow(4, 4, |_, _| [104.0, 0.0]);
        let m = PixelMask::full(4, 4);
        assert_eq!(robustness(&clean, &corrupt, &m, MetricKind::Fl).unwrap(), 0.0);
        let small = flow(4, 4, |_, _| [10.0, 0.0]);
        let off = flow(4, 4, |_, _| [14.0, 0.0]);
        assert_eq!(robustness(&small, &off, &m, MetricKind::Fl).unwrap(), 100.0);
    }

    #[test]
    fn one_px_boundary_is_strict() {
        let gt = flow(3, 3, |_, _| [0.0, 0.0]);
        let pred = flow(3, 3, |_, _| [0.0, 1.0]);
        let m = PixelMask::full(3, 3);
        assert_eq!(accuracy(&pred, &gt, &m, MetricKind::Epe).unwrap(), 1.0);
        assert_eq!(accuracy(&pred, &gt, &m, MetricKind::OnePx).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        let a = flow(3, 3, |_, _| [0.0, 0.0]);
        let d = PredictionField::zeros(3, 3, FieldKind::Disparity1);
        assert!(robustness(&a, &a, &PixelMask::empty(3, 3), MetricKind::Epe).is_err());
        assert!(robustness(&a, &a, &PixelMask::full(3, 2), MetricKind::Epe).is_err());
        assert!(robustness(&a, &d, &PixelMask::full(3, 3), MetricKind::OnePx).is_err());
        assert!(robustness(&d, &d, &PixelMask::full(3, 3), MetricKind::Epe).is_err());
        assert!(robustness(&a, &a, &PixelMask::full(3, 3), MetricKind::D1).is_err());
        let d2 = PredictionField::zeros(3, 3, FieldKind::Disparity2);
        assert!(robustness(&d2, &d2, &PixelMask::full(3, 3), MetricKind::D2).is_ok());
        assert!(robustness(&d2, &d2, &PixelMask::full(3, 3), MetricKind::D1).is_err());
    }

    #[test]
    fn summary_cases() {
        let s = summarize(&[4.0]).unwrap();
        assert_eq!((s.average, s.median), (4.0, 4.0));
        let s = summarize(&[3.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!((s.average, s.median), (2.5, 2.5));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn report_summary_is_recomputable() {
        let mut r = RobustnessReport::new("m", vec![MetricKind::Epe, MetricKind::OnePx]);
        for (i, c) in ["a", "b", "c"].iter().enumerate() {
            r.rows.push(ReportRow {
                corruption: (*c).into(),
                values: vec![i as f64, 10.0 * i as f64],
            });
        }
        let s = r.summary().unwrap();
        assert_eq!(s[0].average, 1.0);
        assert_eq!(s[1].median, 10.0);
        r.rows[0].values.pop();
        assert!(r.summary().is_err());
    }

    #[test]
    fn constant_difference_gap_is_zero() {
        let a = flow(40, 30, |x, y| [x as f32 * 0.25, y as f32 * 0.5]);
        let b = flow(40, 30, |x, y| [x as f32 * 0.25 + 3.0, y as f32 * 0.5 - 4.0]);
        let mask = PixelMask::from_fn(40, 30, |x, y| (x * 7 + y * 3) % 11 == 0);
        let g = robustness_subsampled_vs_full(&a, &b, &mask, MetricKind::Epe).unwrap();
        assert_eq!(g.relative_gap, 0.0);
        assert!(!g.flagged);
    }

    #[test]
    fn hot_pixel_is_flagged() {
        let a = flow(40, 30, |_, _| [0.0, 0.0]);
        let b = flow(40, 30, |x, y| if (x, y) == (1, 1) { [500.0, 0.0] } else { [0.01, 0.0] });
        let mask = PixelMask::from_fn(40, 30, |x, y| x % 4 == 0 && y % 4 == 0);
        let g = robustness_subsampled_vs_full(&a, &b, &mask, MetricKind::Epe).unwrap();
        assert!(g.flagged);
    }

    proptest! {
        #[test]
        fn symmetric_distances_and_ranges(seed in any::<u64>()) {
            let mut s = seed | 1;
            let mut next = || { s ^= s << 13; s ^= s >> 7; s ^= s << 17; ((s >> 40) as f32 / (1u64 << 24) as f32 - 0.5) * 20.0 };
            let a = flow(6, 5, |_, _| [next(), next()]);
            let b = flow(6, 5, |_, _| [next(), next()]);
            let m = PixelMask::full(6, 5);
            let ab = robustness(&a, &b, &m, MetricKind::Epe).unwrap();
            let ba = robustness(&b, &a, &m, MetricKind::Epe).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
            prop_assert!(ab >= 0.0);
            for metric in [MetricKind::OnePx, MetricKind::Fl] {
                let v = robustness(&a, &b, &m, metric).unwrap();
                prop_assert!((0.0..=100.0).contains(&v));
            }
        }

        #[test]
        fn summary_is_permutation_invariant(mut v in proptest::collection::vec(0.0f64..100.0, 1..25), rot in 0usize..25) {
            let s1 = summarize(&v).unwrap();
            let k = rot % v.len();
            v.rotate_left(k);
            v.reverse();
            let s2 = summarize(&v).unwrap();
            prop_assert_eq!(s1, s2);
        }
    }
}
