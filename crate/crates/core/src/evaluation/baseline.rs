use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::{binary_f_scores, EvalReport, FScores, Setup};
use crate::corpus::BinaryLabel;
use crate::error::{Error, Result};
use crate::rng;

/// F scores of uniformly random labels, one entry per repetition.
pub fn random_baseline_runs(
    gold: &BTreeMap<String, BinaryLabel>,
    seed: u64,
    repetitions: usize,
) -> Result<Vec<FScores>> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be positive"));
    }
    (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, r as u64);
            let pred = gold
                .keys()
                .map(|k| {
                    let l = if rng.gen_bool(0.5) { BinaryLabel::Similar } else { BinaryLabel::Dissimilar };
                    (k.clone(), l)
                })
                .collect();
            binary_f_scores(&pred, gold)
        })
        .collect()
}

/// Random-prediction baseline averaged over repetitions.
pub fn random_baseline(gold: &BTreeMap<String, BinaryLabel>, seed: u64, repetitions: usize) -> Result<EvalReport> {
    let runs = random_baseline_runs(gold, seed, repetitions)?;
    let mut scores = FScores::mean(&runs).expect("at least one repetition");
    scores.n_pairs = gold.len();
    Ok(EvalReport {
        setup: Setup::WithoutClustering,
        fold_id: None,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_similar(n: usize) -> BTreeMap<String, BinaryLabel> {
        (0..n).map(|i| (format!("p{i:04}"), BinaryLabel::Similar)).collect()
    }

    #[test]
    fn all_similar_gold_expectation() {
        // Precision 1, recall ~1/2 => F_sim ~ 2/3; no dissimilar gold => F_dissim = 0.
        let r = random_baseline(&all_similar(2000), 5, 50).unwrap();
        assert!((r.scores.f_sim - 2.0 / 3.0).abs() < 0.01, "{:?}", r.scores);
        assert_eq!(r.scores.f_dissim, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = all_similar(50);
        assert_eq!(random_baseline(&g, 1, 5).unwrap(), random_baseline(&g, 1, 5).unwrap());
    }

    #[test]
    fn more_repetitions_shrink_variance() {
        let gold: BTreeMap<String, BinaryLabel> = (0..60)
            .map(|i| (format!("p{i}"), if i % 3 == 0 { BinaryLabel::Similar } else { BinaryLabel::Dissimilar }))
            .collect();
        let variance = |reps: usize| {
            let vals: Vec<f64> = (0..20).map(|s| random_baseline(&gold, 100 + s, reps).unwrap().scores.f_mean).collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
        };
        assert!(variance(1000) < variance(10));
    }
}
