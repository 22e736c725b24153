//! Scoring of pair labels, graded similarities and stance predictions.

mod baseline;
mod classification;
mod correlation;
mod learning_curve;
mod transitivity;

pub use baseline::{random_baseline, random_baseline_runs};
pub use classification::{
    aggregate_classification, classification_report, evaluate_stance_predictions, load_stance_gold,
    load_stance_predictions, read_stance_gold, read_stance_predictions, ClassScores, ClassificationReport,
    ClassificationSummary, StanceGold,
};
pub use correlation::{average_ranks, correlation_report, macro_average, pearson, spearman, CorrelationReport};
pub use learning_curve::{learning_curve, LearningCurvePoint};
pub use transitivity::{transitivity_report, TransitivityReport};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::clustering::{normalize_grid, TunedThreshold};
use crate::corpus::BinaryLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    WithoutClustering,
    WithClustering,
}

impl std::fmt::Display for Setup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setup::WithoutClustering => "without_clustering",
            Setup::WithClustering => "with_clustering",
        })
    }
}

/// F1 of the similar label, F1 of the dissimilar label and their mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FScores {
    pub f_sim: f64,
    pub f_dissim: f64,
    pub f_mean: f64,
    pub n_pairs: usize,
}

impl FScores {
    pub fn new(f_sim: f64, f_dissim: f64, n_pairs: usize) -> Self {
        FScores {
            f_sim,
            f_dissim,
            f_mean: (f_sim + f_dissim) / 2.0,
            n_pairs,
        }
    }

    /// Unweighted mean of each F component; `n_pairs` is summed.
    pub fn mean<'a>(runs: impl IntoIterator<Item = &'a FScores>) -> Option<FScores> {
        let runs: Vec<&FScores> = runs.into_iter().collect();
        if runs.is_empty() {
            return None;
        }
        let k = runs.len() as f64;
        Some(FScores::new(
            runs.iter().map(|r| r.f_sim).sum::<f64>() / k,
            runs.iter().map(|r| r.f_dissim).sum::<f64>() / k,
            runs.iter().map(|r| r.n_pairs).sum(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub setup: Setup,
    pub fold_id: Option<usize>,
    #[serde(flatten)]
    pub scores: FScores,
}

/// F1 with the zero convention: a label with no true positives scores 0.
pub(crate) fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if tp == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    }
}

pub fn binary_f_scores(
    pred: &BTreeMap<String, BinaryLabel>,
    gold: &BTreeMap<String, BinaryLabel>,
) -> Result<FScores> {
    if pred.len() != gold.len() || pred.keys().zip(gold.keys()).any(|(a, b)| a != b) {
        let missing = gold.keys().find(|k| !pred.contains_key(*k));
        let extra = pred.keys().find(|k| !gold.contains_key(*k));
        return Err(Error::KeyMismatch(format!(
            "predictions missing {missing:?}, unexpected {extra:?}"
        )));
    }
    // confusion counts with "similar" as the positive class
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (k, p) in pred {
        match (p.is_similar(), gold[k].is_similar()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(FScores::new(f1(tp, fp, fn_), f1(tn, fn_, fp), pred.len()))
}

/// Similar iff the score strictly exceeds the threshold.
pub fn threshold_pair_labels(scores: &BTreeMap<String, f64>, threshold: f64) -> BTreeMap<String, BinaryLabel> {
    scores
        .iter()
        .map(|(k, &s)| {
            let label = if s > threshold { BinaryLabel::Similar } else { BinaryLabel::Dissimilar };
            (k.clone(), label)
        })
        .collect()
}

/// Grid value maximising F_mean of [`threshold_pair_labels`] against `gold`;
/// ties go to the smaller threshold.
pub fn tune_direct_threshold(
    scores: &BTreeMap<String, f64>,
    gold: &BTreeMap<String, BinaryLabel>,
    grid: &[f64],
) -> Result<TunedThreshold> {
    let grid = normalize_grid(grid)?;
    if scores.is_empty() {
        return Err(Error::InsufficientData("no labeled tuning pairs".into()));
    }
    let mut best: Option<TunedThreshold> = None;
    for t in grid {
        let objective = binary_f_scores(&threshold_pair_labels(scores, t), gold)?.f_mean;
        if best.is_none_or(|b| objective > b.objective) {
            best = Some(TunedThreshold { threshold: t, objective });
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// `points` evenly spaced values spanning `[min, max]` of `scores`.
pub fn default_grid(scores: impl IntoIterator<Item = f64>, points: usize) -> Result<Vec<f64>> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in scores {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InsufficientData("no scores to derive a threshold grid from".into()));
    }
    if points < 2 || lo == hi {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i + 1 == points { hi } else { lo + step * i as f64 })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use BinaryLabel::{Dissimilar as D, Similar as S};

    fn labels(v: &[BinaryLabel]) -> BTreeMap<String, BinaryLabel> {
        v.iter().enumerate().map(|(i, l)| (format!("p{i}"), *l)).collect()
    }

    #[test]
    fn perfect_predictions() {
        let g = labels(&[S, S, D]);
        let f = binary_f_scores(&g, &g).unwrap();
        assert_eq!((f.f_sim, f.f_dissim, f.f_mean), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_computed_confusion() {
        let f = binary_f_scores(&labels(&[S, D, D, D]), &labels(&[S, S, D, D])).unwrap();
        assert!((f.f_sim - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.f_dissim - 4.0 / 5.0).abs() < 1e-15);
        assert!((f.f_mean - 11.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn zero_recall_convention() {
        let f = binary_f_scores(&labels(&[D, D, D]), &labels(&[S, D, S])).unwrap();
        assert_eq!(f.f_sim, 0.0);
        assert!(f.f_dissim > 0.0);
    }

    #[test]
    fn key_mismatch() {
        let mut p = labels(&[S]);
        p.insert("zz".into(), S);
        assert!(matches!(binary_f_scores(&p, &labels(&[S, S])), Err(Error::KeyMismatch(_))));
    }

    #[test]
    fn strict_threshold() {
        let scores: BTreeMap<String, f64> = [("p".to_string(), 0.6), ("q".to_string(), 0.5)].into();
        let l = threshold_pair_labels(&scores, 0.5);
        assert_eq!(l["p"], S);
        assert_eq!(l["q"], D);
        assert!(threshold_pair_labels(&scores, 0.49).values().all(|l| *l == S));
    }

    #[test]
    fn direct_tuning() {
        let scores: BTreeMap<String, f64> =
            [("a", 0.9), ("b", 0.85), ("c", 0.8), ("d", 0.3), ("e", 0.1)].map(|(k, v)| (k.to_string(), v)).into();
        let gold: BTreeMap<String, BinaryLabel> =
            [("a", S), ("b", S), ("c", S), ("d", D), ("e", D)].map(|(k, v)| (k.to_string(), v)).into();
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        // 0.3 still labels d dissimilar (strict), so 0.3 is the smallest perfect value.
        let t = tune_direct_threshold(&scores, &gold, &grid).unwrap();
        assert_eq!(t.threshold, 0.3);
        assert_eq!(t.objective, 1.0);
        assert_eq!(tune_direct_threshold(&scores, &gold, &[0.42]).unwrap().threshold, 0.42);
        assert_eq!(tune_direct_threshold(&scores, &gold, &[0.5, 0.4]).unwrap().threshold, 0.4);
        assert!(tune_direct_threshold(&scores, &gold, &[]).is_err());
    }

    #[test]
    fn grid_spans_range() {
        let g = default_grid([0.2, 0.7, 0.4], 101).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.2);
        assert_eq!(g[100], 0.7);
        assert_eq!(default_grid([0.3, 0.3], 101).unwrap(), vec![0.3]);
        assert!(default_grid(std::iter::empty(), 101).is_err());
    }
}
