//! Ranking models from per-corruption robustness values.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::metrics::summarize;

/// One model's value per corruption; lower is more robust.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelScores {
    pub model: String,
    pub entries: Vec<(String, f64)>,
}

impl ModelScores {
    pub fn new(model: impl Into<String>, entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            model: model.into(),
            entries: entries.into_iter().collect(),
        }
    }

    fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }
}

/// Checks that every model covers the same corruptions exactly once and
/// returns the sorted corruption names.
fn common_corruptions(tables: &[ModelScores]) -> Result<Vec<String>> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidParameter("ranking needs at least one model".into()))?;
    let mut models = BTreeSet::new();
    let mut reference: Option<BTreeSet<&str>> = None;
    for t in tables {
        if !models.insert(t.model.as_str()) {
            return Err(Error::InvalidParameter(format!("model {} appears twice", t.model)));
        }
        if t.entries.is_empty() {
            return Err(Error::Ragged(format!("model {} has no corruption entries", t.model)));
        }
        let set: BTreeSet<&str> = t.entries.iter().map(|e| e.0.as_str()).collect();
        if set.len() != t.entries.len() {
            return Err(Error::Ragged(format!("model {} lists a corruption twice", t.model)));
        }
        if let Some(v) = t.entries.iter().find(|e| e.1.is_nan()) {
            return Err(Error::InvalidParameter(format!("model {} has a NaN value for {}", t.model, v.0)));
        }
        match &reference {
            None => reference = Some(set),
            Some(r) if *r != set => {
                let missing: Vec<&str> = r.symmetric_difference(&set).copied().collect();
                return Err(Error::Ragged(format!(
                    "model {} and model {} cover different corruptions ({})",
                    first.model,
                    t.model,
                    missing.join(", ")
                )));
            }
            Some(_) => {}
        }
    }
    Ok(reference.unwrap_or_default().into_iter().map(String::from).collect())
}

/// `counts[i][j]`: corruptions on which model `i` is strictly lower than
/// model `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairwiseMatrix {
    pub models: Vec<String>,
    pub counts: Vec<Vec<u32>>,
    pub corruptions: u32,
}

impl PairwiseMatrix {
    pub fn new(models: Vec<String>, counts: Vec<Vec<u32>>, corruptions: u32) -> Result<Self> {
        let m = Self {
            models,
            counts,
            corruptions,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.models.len();
        if self.counts.len() != n || self.counts.iter().any(|r| r.len() != n) {
            return Err(Error::Ragged(format!("pairwise matrix must be {n}x{n}")));
        }
        if self.models.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidParameter("pairwise matrix has duplicate model ids".into()));
        }
        for i in 0..n {
            if self.counts[i][i] != 0 {
                return Err(Error::InvalidParameter(format!("diagonal entry for {} must be 0", self.models[i])));
            }
            for j in 0..i {
                if self.counts[i][j] + self.counts[j][i] > self.corruptions {
                    return Err(Error::InvalidParameter(format!(
                        "{} vs {} exceeds {} corruptions",
                        self.models[i], self.models[j], self.corruptions
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

impl fmt::Display for PairwiseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.models.iter().map(String::len).max().unwrap_or(0).max(3);
        write!(f, "{:width$}", "")?;
        for m in &self.models {
            write!(f, " {m:>width$}")?;
        }
        writeln!(f)?;
        for (m, row) in self.models.iter().zip(&self.counts) {
            write!(f, "{m:width$}")?;
            for c in row {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Counts strict wins per corruption; exact ties count for neither model.
pub fn build_matrix(tables: &[ModelScores]) -> Result<PairwiseMatrix> {
    let corruptions = common_corruptions(tables)?;
    let aligned: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| {
            corruptions
                .iter()
                .map(|c| t.entries.iter().find(|e| &e.0 == c).map(|e| e.1).unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    let n = tables.len();
    let mut counts = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                counts[i][j] = aligned[i].iter().zip(&aligned[j]).filter(|(a, b)| a < b).count() as u32;
            }
        }
    }
    Ok(PairwiseMatrix {
        models: tables.iter().map(|t| t.model.clone()).collect(),
        counts,
        corruptions: corruptions.len() as u32,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RankMethod {
    Average,
    Median,
    Schulze,
}

impl RankMethod {
    pub fn name(self) -> &'static str {
        match self {
            RankMethod::Average => "average",
            RankMethod::Median => "median",
            RankMethod::Schulze => "schulze",
        }
    }

    pub fn parse(s: &str) -> Option<RankMethod> {
        match s.to_ascii_lowercase().as_str() {
            "average" => Some(RankMethod::Average),
            "median" => Some(RankMethod::Median),
            "schulze" => Some(RankMethod::Schulze),
            _ => None,
        }
    }
}

impl fmt::Display for RankMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankedModel {
    pub model: String,
    /// Summary score; absent for Schulze.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub score: Option<f64>,
    /// Not separable from the next entry; the order between them is by id.
    pub tied_with_next: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RankOutcome {
    pub method: RankMethod,
    pub ranking: Vec<RankedModel>,
}

impl RankOutcome {
    pub fn order(&self) -> Vec<&str> {
        self.ranking.iter().map(|r| r.model.as_str()).collect()
    }

    pub fn has_ties(&self) -> bool {
        self.ranking.iter().any(|r| r.tied_with_next)
    }
}

/// Strongest-path strengths under winning-votes edges: the edge `i -> j`
/// has strength `counts[i][j]` when `i` beats `j` head to head and 0
/// otherwise.
pub fn strongest_paths(m: &PairwiseMatrix) -> Vec<Vec<u32>> {
    let n = m.len();
    let d = &m.counts;
    let mut p = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j] > d[j][i] {
                p[i][j] = d[i][j];
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in 0..n {
                if j != i && j != k {
                    p[i][j] = p[i][j].max(p[i][k].min(p[k][j]));
                }
            }
        }
    }
    p
}

/// Schulze ordering: models sorted by how many others they beat on
/// strongest paths, ties broken by model id and flagged.
pub fn schulze_rank(m: &PairwiseMatrix) -> Result<RankOutcome> {
    m.validate()?;
    if m.is_empty() {
        return Err(Error::InvalidParameter("ranking needs at least one model".into()));
    }
    let p = strongest_paths(m);
    let n = m.len();
    let beats = |i: usize, j: usize| p[i][j] > p[j][i];
    let wins: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| beats(i, j)).count()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| wins[b].cmp(&wins[a]).then_with(|| m.models[a].cmp(&m.models[b])));
    let ranking = idx
        .iter()
        .enumerate()
        .map(|(pos, &i)| RankedModel {
            model: m.models[i].clone(),
            score: None,
            tied_with_next: idx.get(pos + 1).is_some_and(|&j| !beats(i, j)),
        })
        .collect();
    Ok(RankOutcome {
        method: RankMethod::Schulze,
        ranking,
    })
}

/// Ascending sort by average or median value.
pub fn score_rank(tables: &[ModelScores], method: RankMethod) -> Result<RankOutcome> {
    common_corruptions(tables)?;
    let mut scored: Vec<(f64, &str)> = tables
        .iter()
        .map(|t| {
            let s = summarize(&t.values())?;
            let v = match method {
                RankMethod::Average => s.average,
                RankMethod::Median => s.median,
                RankMethod::Schulze => {
                    return Err(Error::InvalidParameter("schulze ranking needs a pairwise matrix".into()))
                }
            };
            Ok((v, t.model.as_str()))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let ranking = scored
        .iter()
        .enumerate()
        .map(|(pos, &(v, model))| RankedModel {
            model: model.into(),
            score: Some(v),
            tied_with_next: scored.get(pos + 1).is_some_and(|n| n.0 == v),
        })
        .collect();
    Ok(RankOutcome { method, ranking })
}

/// Any of the three methods from per-corruption tables.
pub fn rank(tables: &[ModelScores], method: RankMethod) -> Result<RankOutcome> {
    match method {
        RankMethod::Schulze => schulze_rank(&build_matrix(tables)?),
        _ => score_rank(tables, method),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn table(model: &str, values: &[f64]) -> ModelScores {
        ModelScores::new(model, values.iter().enumerate().map(|(i, &v)| (format!("c{i:02}"), v)))
    }

    fn names(o: &RankOutcome) -> Vec<String> {
        o.order().into_iter().map(String::from).collect()
    }

    #[test]
    fn dominant_model_gets_all_wins() {
        let a = table("A", &[1.0; 20]);
        let b = table("B", &[2.0; 20]);
        let m = build_matrix(&[a, b]).unwrap();
        assert_eq!(m.counts, vec![vec![0, 20], vec![0, 0]]);
        let r = schulze_rank(&m).unwrap();
        assert_eq!(r.order(), ["A", "B"]);
        assert!(!r.has_ties());
    }

    #[test]
    fn identical_tables_give_zero_matrix_and_flagged_ties() {
        let v = [1.0, 2.0, 3.0];
        let m = build_matrix(&[table("x", &v), table("y", &v), table("w", &v)]).unwrap();
        assert!(m.counts.iter().flatten().all(|&c| c == 0));
        let r = schulze_rank(&m).unwrap();
        assert_eq!(r.order(), ["w", "x", "y"]);
        assert!(r.ranking[0].tied_with_next && r.ranking[1].tied_with_next);
        assert!(!r.ranking[2].tied_with_next);
    }

    #[test]
    fn ragged_tables_rejected() {
        let a = table("A", &[1.0, 2.0]);
        let b = table("B", &[1.0, 2.0, 3.0]);
        assert!(matches!(build_matrix(&[a.clone(), b.clone()]), Err(Error::Ragged(_))));
        assert!(matches!(score_rank(&[a, b], RankMethod::Average), Err(Error::Ragged(_))));
    }

    #[test]
    fn entries_are_matched_by_name() {
        let a = ModelScores::new("A", [("x".to_string(), 1.0), ("y".to_string(), 5.0)]);
        let b = ModelScores::new("B", [("y".to_string(), 4.0), ("x".to_string(), 2.0)]);
        let m = build_matrix(&[a, b]).unwrap();
        assert_eq!(m.counts, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn classic_condorcet_cycle() {
        // Standard 5-candidate example with known Schulze winner order E > A > C > B > D.
        let models: Vec<String> = ["A", "B", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
        let counts = vec![
            vec![0, 20, 26, 30, 22],
            vec![25, 0, 16, 33, 18],
            vec![19, 29, 0, 17, 24],
            vec![15, 12, 28, 0, 14],
            vec![23, 27, 21, 31, 0],
        ];
        let m = PairwiseMatrix::new(models, counts, 45).unwrap();
        let r = schulze_rank(&m).unwrap();
        assert_eq!(r.order(), ["E", "A", "C", "B", "D"]);
        assert!(!r.has_ties());
    }

    #[test]
    fn score_rank_orders_and_reports_scores() {
        let t = [table("a", &[3.0, 1.0, 2.0]), table("b", &[1.0, 1.0, 1.0]), table("c", &[0.0, 9.0, 0.5])];
        let avg = score_rank(&t, RankMethod::Average).unwrap();
        assert_eq!(avg.order(), ["b", "a", "c"]);
        assert_eq!(avg.ranking[1].score, Some(2.0));
        let med = score_rank(&t, RankMethod::Median).unwrap();
        assert_eq!(med.order(), ["c", "b", "a"]);
        let single = [table("p", &[2.0]), table("q", &[1.0])];
        assert_eq!(score_rank(&single, RankMethod::Median).unwrap().order(), ["q", "p"]);
    }

    #[test]
    fn average_totals_match_summarize() {
        let t = table("a", &[0.1, 0.7, 0.2, 1e-3, 5.5]);
        let s = summarize(&t.values()).unwrap();
        let r = score_rank(&[t], RankMethod::Average).unwrap();
        assert_eq!(r.ranking[0].score.unwrap().to_bits(), s.average.to_bits());
    }

    #[test]
    fn invalid_matrix_rejected() {
        let models = vec!["a".to_string(), "b".to_string()];
        assert!(PairwiseMatrix::new(models.clone(), vec![vec![1, 0], vec![0, 0]], 3).is_err());
        assert!(PairwiseMatrix::new(models.clone(), vec![vec![0, 2], vec![2, 0]], 3).is_err());
        assert!(PairwiseMatrix::new(models, vec![vec![0, 2]], 3).is_err());
    }

    #[test]
    fn matrix_dump_lists_every_model() {
        let m = build_matrix(&[table("alpha", &[1.0]), table("b", &[2.0])]).unwrap();
        let s = m.to_string();
        assert_eq!(s.lines().count(), 3);
        assert!(s.lines().nth(1).unwrap().starts_with("alpha"));
    }

    fn random_tables(seed: u64, models: usize, corr: usize) -> Vec<ModelScores> {
        let mut s = seed | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 54) as f64 / 64.0
        };
        (0..models)
            .map(|m| table(&format!("m{m}"), &(0..corr).map(|_| next()).collect::<Vec<_>>()))
            .collect()
    }

    proptest! {
        #[test]
        fn schulze_is_label_invariant(seed in any::<u64>(), rot in 0usize..6) {
            let t = random_tables(seed, 6, 9);
            let base = schulze_rank(&build_matrix(&t).unwrap()).unwrap();
            let mut p = t.clone();
            p.rotate_left(rot);
            p.reverse();
            let other = schulze_rank(&build_matrix(&p).unwrap()).unwrap();
            prop_assert_eq!(names(&base), names(&other));
        }

        #[test]
        fn schulze_ignores_all_tie_corruption(seed in any::<u64>()) {
            let t = random_tables(seed, 5, 7);
            let base = schulze_rank(&build_matrix(&t).unwrap()).unwrap();
            let mut more = t.clone();
            for m in &mut more {
                m.entries.push(("tied".into(), 1.0));
            }
            prop_assert_eq!(names(&base), names(&schulze_rank(&build_matrix(&more).unwrap()).unwrap()));
        }

        #[test]
        fn condorcet_winner_ranks_first(seed in any::<u64>()) {
            let mut t = random_tables(seed, 5, 8);
            t.push(table("zz-best", &[-1.0; 8]));
            let r = schulze_rank(&build_matrix(&t).unwrap()).unwrap();
            prop_assert_eq!(r.order()[0], "zz-best");
        }

        #[test]
        fn matrix_pairs_bounded(seed in any::<u64>()) {
            let t = random_tables(seed, 4, 11);
            let m = build_matrix(&t).unwrap();
            prop_assert!(m.validate().is_ok());
        }

        #[test]
        fn summary_rankings_respect_transforms(seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
            let t = random_tables(seed, 5, 10);
            let affine: Vec<ModelScores> = t.iter().map(|m| ModelScores::new(m.model.clone(), m.entries.iter().map(|(c, v)| (c.clone(), a * v + b)))).collect();
            let cubed: Vec<ModelScores> = t.iter().map(|m| ModelScores::new(m.model.clone(), m.entries.iter().map(|(c, v)| (c.clone(), v * v * v + v)))).collect();
            let avg = score_rank(&t, RankMethod::Average).unwrap();
            let avg2 = score_rank(&affine, RankMethod::Average).unwrap();
            // Affine maps can merge near-equal scores; compare only strict separations.
            for w in avg.ranking.windows(2) {
                let gap = w[1].score.unwrap() - w[0].score.unwrap();
                if gap > 1e-9 {
                    let p0 = avg2.order().iter().position(|m| *m == w[0].model).unwrap();
                    let p1 = avg2.order().iter().position(|m| *m == w[1].model).unwrap();
                    prop_assert!(p0 < p1);
                }
            }
            // Medians of 10 values average two entries, so only order-preserving maps
            // that are affine on each pair are exact; use odd counts for the monotone case.
            let odd: Vec<ModelScores> = t.iter().map(|m| ModelScores::new(m.model.clone(), m.entries[..9].iter().cloned())).collect();
            let odd_cubed: Vec<ModelScores> = cubed.iter().map(|m| ModelScores::new(m.model.clone(), m.entries[..9].iter().cloned())).collect();
            prop_assert_eq!(names(&score_rank(&odd, RankMethod::Median).unwrap()), names(&score_rank(&odd_cubed, RankMethod::Median).unwrap()));
        }
    }
}
