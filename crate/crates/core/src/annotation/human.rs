//! Split-half estimate of human performance on the pair-similarity task.
//!
//! Each repetition splits every pair's votes at random into two groups,
//! consolidates each group with MACE and scores group one against group two.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{mace_consolidate, validate_records, AnnotationRecord, MaceConfig, MaceResult};
use crate::clustering::{agglomerative_cluster, pair_labels_from_clustering};
use crate::corpus::{binarize, AspectCorpus, BinaryLabel};
use crate::error::{Error, Result};
use crate::evaluation::{binary_f_scores, EvalReport, FScores, Setup};
use crate::rng;
use crate::similarity::{sentence_pair_key, ScoreMatrix, SimilaritySource};

/// What the predicting group contributes as a sentence similarity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaceScoreKind {
    /// 1 for pairs consolidated as similar, 0 otherwise.
    #[default]
    BinaryLabels,
    /// Posterior probability of some or high similarity.
    SimilarityPosterior,
}

impl std::str::FromStr for MaceScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary-labels" | "binary_labels" => Ok(MaceScoreKind::BinaryLabels),
            "similarity-posterior" | "similarity_posterior" => Ok(MaceScoreKind::SimilarityPosterior),
            other => Err(Error::invalid(format!("unknown MACE score kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HumanClusteringConfig {
    pub scores: MaceScoreKind,
    pub threshold: f64,
    /// Similarity of sentence pairs that were never annotated.
    pub missing_score: f64,
}

impl Default for HumanClusteringConfig {
    fn default() -> Self {
        HumanClusteringConfig {
            scores: MaceScoreKind::BinaryLabels,
            threshold: 0.5,
            missing_score: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum HumanMode {
    WithoutClustering,
    WithClustering(HumanClusteringConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HumanPerformance {
    pub report: EvalReport,
    pub per_repetition: Vec<FScores>,
    pub scores_used: Option<MaceScoreKind>,
}

fn group_votes(records: &[AnnotationRecord]) -> Result<BTreeMap<&str, Vec<&AnnotationRecord>>> {
    validate_records(records)?;
    let mut by_pair: BTreeMap<&str, Vec<&AnnotationRecord>> = BTreeMap::new();
    for r in records {
        by_pair.entry(&r.pair_id).or_default().push(r);
    }
    if let Some((id, _)) = by_pair.iter().find(|(_, v)| v.len() < 2) {
        return Err(Error::InsufficientData(format!("pair `{id}` has fewer than two annotations")));
    }
    for votes in by_pair.values_mut() {
        votes.sort_by(|a, b| a.worker_id.cmp(&b.worker_id));
    }
    Ok(by_pair)
}

fn binary_gold(result: &MaceResult) -> BTreeMap<String, BinaryLabel> {
    result.gold.iter().map(|(k, &l)| (k.clone(), binarize(l))).collect()
}

fn clustered_labels(
    corpus: &AspectCorpus,
    predicted: &MaceResult,
    config: &HumanClusteringConfig,
) -> Result<BTreeMap<String, BinaryLabel>> {
    let mut scores = ScoreMatrix::new(format!("mace:{:?}", config.scores)).with_missing_score(Some(config.missing_score));
    let mut seen = BTreeSet::new();
    let mut topics = BTreeSet::new();
    for (pair_id, &label) in &predicted.gold {
        let pair = corpus.pair(pair_id).ok_or_else(|| Error::Missing {
            kind: "pair",
            id: pair_id.clone(),
        })?;
        topics.insert(pair.topic_id.as_str());
        let key = sentence_pair_key(&pair.a, &pair.b);
        // duplicate sentence pairs keep the first pair id
        if !seen.insert(key.clone()) {
            continue;
        }
        let score = match config.scores {
            MaceScoreKind::BinaryLabels => f64::from(u8::from(binarize(label).is_similar())),
            MaceScoreKind::SimilarityPosterior => predicted.similar_probability(pair_id).expect("posterior of gold item"),
        };
        scores.insert(&key, score)?;
    }
    let source = SimilaritySource::Scores(scores);
    let mut labels = BTreeMap::new();
    for topic in topics {
        let clustering = agglomerative_cluster(&corpus.topic_sentences(topic), &source, config.threshold)?;
        let pairs = corpus.pairs_in_topic(topic).filter(|p| predicted.gold.contains_key(&p.pair_id));
        labels.extend(pair_labels_from_clustering(&clustering, pairs)?);
    }
    Ok(labels)
}

/// Mean split-half F scores over `repetitions`. Groups have sizes ⌈n/2⌉
/// and ⌊n/2⌋. The clustering mode needs the corpus to place pairs in topics.
pub fn estimate_human_performance(
    records: &[AnnotationRecord],
    corpus: Option<&AspectCorpus>,
    repetitions: usize,
    seed: u64,
    mace: &MaceConfig,
    mode: HumanMode,
) -> Result<HumanPerformance> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be positive"));
    }
    let by_pair = group_votes(records)?;
    let corpus = match mode {
        HumanMode::WithClustering(_) => {
            Some(corpus.ok_or_else(|| Error::invalid("clustering mode needs the pair corpus"))?)
        }
        HumanMode::WithoutClustering => None,
    };

    let per_repetition: Vec<FScores> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(seed, rep as u64);
            let mut groups: [Vec<AnnotationRecord>; 2] = [Vec::new(), Vec::new()];
            for votes in by_pair.values() {
                let mut votes = votes.clone();
                votes.shuffle(&mut rng);
                let half = votes.len().div_ceil(2);
                groups[0].extend(votes[..half].iter().map(|r| (*r).clone()));
                groups[1].extend(votes[half..].iter().map(|r| (*r).clone()));
            }
            let consolidate = |g: usize| {
                let config = MaceConfig {
                    seed: rng::derive_seed(mace.seed, &[seed, rep as u64, g as u64]),
                    ..mace.clone()
                };
                mace_consolidate(&groups[g], &config)
            };
            let predicted = consolidate(0)?;
            let reference = consolidate(1)?;
            let mut gold = binary_gold(&reference);
            let pred = match (mode, corpus) {
                (HumanMode::WithClustering(cfg), Some(corpus)) => clustered_labels(corpus, &predicted, &cfg)?,
                _ => binary_gold(&predicted),
            };
            // retention thresholds below 1 can leave the groups with different items
            gold.retain(|k, _| pred.contains_key(k));
            let pred: BTreeMap<String, BinaryLabel> = pred.into_iter().filter(|(k, _)| gold.contains_key(k)).collect();
            binary_f_scores(&pred, &gold)
        })
        .collect::<Result<_>>()?;

    let mut scores = FScores::mean(&per_repetition).expect("at least one repetition");
    scores.n_pairs = by_pair.len();
    let (setup, scores_used) = match mode {
        HumanMode::WithoutClustering => (Setup::WithoutClustering, None),
        HumanMode::WithClustering(cfg) => (Setup::WithClustering, Some(cfg.scores)),
    };
    Ok(HumanPerformance {
        report: EvalReport {
            setup,
            fold_id: None,
            scores,
        },
        per_repetition,
        scores_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusBuilder, GradedLabel};
    use GradedLabel::*;

    fn unanimous() -> Vec<AnnotationRecord> {
        let mut out = Vec::new();
        for (p, l) in [("p1", HighSimilarity), ("p2", NoSimilarity), ("p3", SomeSimilarity), ("p4", DifferentTopic)] {
            for w in 0..7 {
                out.push(AnnotationRecord::new(p, &format!("w{w}"), l));
            }
        }
        out
    }

    #[test]
    fn self_agreement_is_perfect() {
        let h = estimate_human_performance(&unanimous(), None, 3, 1, &MaceConfig::default(), HumanMode::WithoutClustering).unwrap();
        assert_eq!(h.report.scores.f_mean, 1.0);
        assert_eq!(h.per_repetition.len(), 3);
        assert_eq!(h.scores_used, None);
    }

    #[test]
    fn clustering_mode_on_consistent_votes() {
        let mut b = CorpusBuilder::new();
        b.add_text_pair(1, Some("p1"), "t", "one", "two", Some(HighSimilarity)).unwrap();
        b.add_text_pair(2, Some("p2"), "t", "one", "three", Some(NoSimilarity)).unwrap();
        b.add_text_pair(3, Some("p3"), "t", "two", "three", Some(NoSimilarity)).unwrap();
        b.add_text_pair(4, Some("p4"), "t", "three", "four", Some(SomeSimilarity)).unwrap();
        let corpus = b.build();
        let mut records = Vec::new();
        for (p, l) in [("p1", HighSimilarity), ("p2", NoSimilarity), ("p3", DifferentTopic), ("p4", SomeSimilarity)] {
            for w in 0..7 {
                records.push(AnnotationRecord::new(p, &format!("w{w}"), l));
            }
        }
        let mode = HumanMode::WithClustering(HumanClusteringConfig::default());
        let h = estimate_human_performance(&records, Some(&corpus), 2, 1, &MaceConfig::default(), mode).unwrap();
        assert_eq!(h.report.scores.f_mean, 1.0);
        assert_eq!(h.scores_used, Some(MaceScoreKind::BinaryLabels));
        assert_eq!(h.report.setup, Setup::WithClustering);
    }

    #[test]
    fn mean_lies_within_single_runs() {
        let mut records = Vec::new();
        let labels = [HighSimilarity, NoSimilarity, SomeSimilarity, NoSimilarity, DifferentTopic, HighSimilarity, NoSimilarity];
        for p in 0..12 {
            for w in 0..7 {
                records.push(AnnotationRecord::new(&format!("p{p}"), &format!("w{w}"), labels[(p * 3 + w * (p % 4 + 1)) % 7]));
            }
        }
        let cfg = MaceConfig { restarts: 2, ..MaceConfig::default() };
        let h = estimate_human_performance(&records, None, 10, 5, &cfg, HumanMode::WithoutClustering).unwrap();
        let lo = h.per_repetition.iter().map(|r| r.f_mean).fold(f64::INFINITY, f64::min);
        let hi = h.per_repetition.iter().map(|r| r.f_mean).fold(f64::NEG_INFINITY, f64::max);
        assert!(lo - 1e-12 <= h.report.scores.f_mean && h.report.scores.f_mean <= hi + 1e-12);
        let first = estimate_human_performance(&records, None, 1, 5, &cfg, HumanMode::WithoutClustering).unwrap();
        assert_eq!(first.per_repetition[0], h.per_repetition[0]);
    }

    #[test]
    fn errors() {
        let one_vote = vec![AnnotationRecord::new("p", "w", NoSimilarity), AnnotationRecord::new("q", "w", NoSimilarity), AnnotationRecord::new("q", "v", NoSimilarity)];
        assert!(estimate_human_performance(&one_vote, None, 1, 0, &MaceConfig::default(), HumanMode::WithoutClustering).is_err());
        let mode = HumanMode::WithClustering(HumanClusteringConfig::default());
        assert!(estimate_human_performance(&unanimous(), None, 1, 0, &MaceConfig::default(), mode).is_err());
        assert!(estimate_human_performance(&unanimous(), None, 0, 0, &MaceConfig::default(), HumanMode::WithoutClustering).is_err());
    }
}
