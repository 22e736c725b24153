use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{AspectCorpus, FoldPlan};
use crate::error::{Error, Result};
use crate::evaluation::Setup;
use crate::experiment::{evaluate_plan, ExperimentConfig, SourceProvider, SourceRequest};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearningCurvePoint {
    pub size: usize,
    pub f_mean_without: f64,
    pub f_mean_with: f64,
    /// Number of (fold, repetition) runs averaged.
    pub runs: usize,
}

/// For each size, samples that many training topics per fold and
/// repetition, evaluates on the fold's fixed test topics in both setups and
/// averages.
pub fn learning_curve(
    corpus: &AspectCorpus,
    folds: &[FoldPlan],
    sizes: &[usize],
    repetitions: usize,
    seed: u64,
    provider: &dyn SourceProvider,
    config: &ExperimentConfig,
) -> Result<Vec<LearningCurvePoint>> {
    if repetitions == 0 || folds.is_empty() {
        return Err(Error::invalid("learning curve needs at least one fold and one repetition"));
    }
    for f in folds {
        if let Some(&s) = sizes.iter().find(|&&s| s == 0 || s > f.train_topics.len()) {
            return Err(Error::InsufficientData(format!(
                "size {s} invalid for fold {} with {} training topics",
                f.fold_id,
                f.train_topics.len()
            )));
        }
    }
    let units: Vec<(usize, usize, usize)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(si, _)| (0..folds.len()).flat_map(move |fi| (0..repetitions).map(move |r| (si, fi, r))))
        .collect();
    let results: Vec<(f64, f64)> = units
        .par_iter()
        .map(|&(si, fi, r)| {
            let fold = &folds[fi];
            let size = sizes[si];
            let topics: Vec<&String> = fold.train_topics.iter().collect();
            let mut rng = rng::stream(rng::derive_seed(seed, &[fold.fold_id as u64, size as u64]), r as u64);
            let sample: BTreeSet<String> = topics.choose_multiple(&mut rng, size).map(|t| (*t).clone()).collect();
            let plan = FoldPlan {
                fold_id: fold.fold_id,
                train_topics: sample,
                dev_topics: fold.dev_topics.clone(),
                test_topics: fold.test_topics.clone(),
            };
            let request = SourceRequest {
                fold_id: fold.fold_id,
                train_topics: &plan.non_test_topics(),
                size: Some(size),
                repetition: Some(r),
            };
            let source = provider.source(&request)?;
            let without = evaluate_plan(corpus, &plan, &source, Setup::WithoutClustering, config)?;
            let with = evaluate_plan(corpus, &plan, &source, Setup::WithClustering, config)?;
            Ok((without.report.scores.f_mean, with.report.scores.f_mean))
        })
        .collect::<Result<_>>()?;

    let per_size = folds.len() * repetitions;
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(si, &size)| {
            let chunk = &results[si * per_size..(si + 1) * per_size];
            LearningCurvePoint {
                size,
                f_mean_without: chunk.iter().map(|r| r.0).sum::<f64>() / per_size as f64,
                f_mean_with: chunk.iter().map(|r| r.1).sum::<f64>() / per_size as f64,
                runs: per_size,
            }
        })
        .collect())
}
