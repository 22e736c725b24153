//! Cross-topic experiment harnesses.
//!
//! A fold is evaluated by fitting a threshold on its tuning topics and
//! scoring the labeled pairs of its test topics, either by thresholding the
//! pair similarity directly or through agglomerative clustering of each test
//! topic. Folds run in parallel; results are collected in fold order.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{ThresholdScope, TopicTrees, TunedThreshold};
use crate::corpus::{binarize, AfsCorpus, AspectCorpus, BinaryLabel, FoldPlan, PairCorpus};
use crate::error::{Error, Result};
use crate::evaluation::{
    binary_f_scores, correlation_report, default_grid, macro_average, threshold_pair_labels, tune_direct_threshold,
    CorrelationReport, EvalReport, FScores, Setup,
};
use crate::similarity::{SimilaritySource, TfIdfConfig, TfIdfModel};

/// Which topics of a fold the threshold is fitted on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TuningSplit {
    /// Train and dev topics together.
    #[default]
    NonTest,
    Train,
    Dev,
}

impl std::str::FromStr for TuningSplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-test" | "non_test" => Ok(TuningSplit::NonTest),
            "train" => Ok(TuningSplit::Train),
            "dev" => Ok(TuningSplit::Dev),
            other => Err(Error::invalid(format!("unknown tuning split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpec {
    /// Evenly spaced values across the observed tuning-score range.
    Auto { points: usize },
    Explicit(Vec<f64>),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Auto { points: 101 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub tuning: TuningSplit,
    pub scope: ThresholdScope,
}

/// What a provider is asked to build a similarity source for.
#[derive(Debug, Clone, Copy)]
pub struct SourceRequest<'a> {
    pub fold_id: usize,
    /// Topics the source may learn from (never test topics).
    pub train_topics: &'a BTreeSet<String>,
    /// Learning-curve sample size, when applicable.
    pub size: Option<usize>,
    pub repetition: Option<usize>,
}

/// Supplies the similarity source used for one fold (or learning-curve run).
pub trait SourceProvider: Sync {
    fn source(&self, request: &SourceRequest<'_>) -> Result<Arc<SimilaritySource>>;
}

/// The same source for every request.
pub struct FixedSource(pub Arc<SimilaritySource>);

impl SourceProvider for FixedSource {
    fn source(&self, _: &SourceRequest<'_>) -> Result<Arc<SimilaritySource>> {
        Ok(Arc::clone(&self.0))
    }
}

/// Builds a Tf-Idf model from the sentences of the requested training topics.
pub struct TfIdfProvider<'c, G> {
    pub corpus: &'c PairCorpus<G>,
    pub config: TfIdfConfig,
}

impl<G: Sync> SourceProvider for TfIdfProvider<'_, G> {
    fn source(&self, request: &SourceRequest<'_>) -> Result<Arc<SimilaritySource>> {
        let texts = self.corpus.texts_in_topics(request.train_topics);
        let model = TfIdfModel::build(&texts, self.config.clone())?;
        Ok(Arc::new(SimilaritySource::TfIdf(model)))
    }
}

impl<F> SourceProvider for F
where
    F: Fn(&SourceRequest<'_>) -> Result<Arc<SimilaritySource>> + Sync,
{
    fn source(&self, request: &SourceRequest<'_>) -> Result<Arc<SimilaritySource>> {
        self(request)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldOutcome {
    pub fold_id: usize,
    pub threshold: TunedThreshold,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub setup: Setup,
    pub folds: Vec<FoldOutcome>,
    /// Unweighted mean over folds.
    pub aggregate: FScores,
}

fn tuning_topics(plan: &FoldPlan, split: TuningSplit) -> Result<BTreeSet<String>> {
    let topics = match split {
        TuningSplit::NonTest => plan.non_test_topics(),
        TuningSplit::Train => plan.train_topics.clone(),
        TuningSplit::Dev => plan.dev_topics.clone(),
    };
    if topics.is_empty() {
        return Err(Error::InsufficientData(format!(
            "fold {} has no {split:?} topics to tune on",
            plan.fold_id
        )));
    }
    Ok(topics)
}

fn labeled_scores(
    corpus: &AspectCorpus,
    topics: &BTreeSet<String>,
    source: &SimilaritySource,
) -> Result<(BTreeMap<String, f64>, BTreeMap<String, BinaryLabel>)> {
    let labeled: Vec<_> = corpus.pairs_in_topics(topics).filter(|p| p.gold.is_some()).collect();
    let gold = labeled
        .iter()
        .map(|p| (p.pair_id.clone(), binarize(p.gold.expect("filtered"))))
        .collect();
    let scores = source.pair_scores(corpus, labeled.iter().copied())?.into_iter().collect();
    Ok((scores, gold))
}

fn resolve_grid(spec: &GridSpec, tuning_scores: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    match spec {
        GridSpec::Auto { points } => default_grid(tuning_scores.values().copied(), *points),
        GridSpec::Explicit(v) => Ok(v.clone()),
    }
}

/// Tunes on the plan's tuning topics and scores its test topics.
pub fn evaluate_plan(
    corpus: &AspectCorpus,
    plan: &FoldPlan,
    source: &SimilaritySource,
    setup: Setup,
    config: &ExperimentConfig,
) -> Result<FoldOutcome> {
    let tune_on = tuning_topics(plan, config.tuning)?;
    let (tune_scores, tune_gold) = labeled_scores(corpus, &tune_on, source)?;
    let grid = resolve_grid(&config.grid, &tune_scores)?;
    let (threshold, scores) = match setup {
        Setup::WithoutClustering => {
            let threshold = tune_direct_threshold(&tune_scores, &tune_gold, &grid)?;
            let (test_scores, test_gold) = labeled_scores(corpus, &plan.test_topics, source)?;
            let pred = threshold_pair_labels(&test_scores, threshold.threshold);
            (threshold, binary_f_scores(&pred, &test_gold)?)
        }
        Setup::WithClustering => {
            let threshold = TopicTrees::build(corpus, &tune_on, source)?.tune(&grid, config.scope)?;
            let test = TopicTrees::build(corpus, &plan.test_topics, source)?;
            let pred = test.predict(threshold.threshold)?;
            (threshold, binary_f_scores(&pred, test.gold())?)
        }
    };
    if scores.n_pairs == 0 {
        return Err(Error::InsufficientData(format!("fold {} has no labeled test pairs", plan.fold_id)));
    }
    Ok(FoldOutcome {
        fold_id: plan.fold_id,
        threshold,
        report: EvalReport {
            setup,
            fold_id: Some(plan.fold_id),
            scores,
        },
    })
}

/// Runs every fold and averages the per-fold scores.
pub fn run_cross_topic(
    corpus: &AspectCorpus,
    folds: &[FoldPlan],
    provider: &dyn SourceProvider,
    setup: Setup,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if folds.is_empty() {
        return Err(Error::invalid("no folds to evaluate"));
    }
    let outcomes: Vec<FoldOutcome> = folds
        .par_iter()
        .map(|plan| {
            let train = plan.non_test_topics();
            let source = provider.source(&SourceRequest {
                fold_id: plan.fold_id,
                train_topics: &train,
                size: None,
                repetition: None,
            })?;
            evaluate_plan(corpus, plan, &source, setup, config)
        })
        .collect::<Result<_>>()?;
    let aggregate = FScores::mean(outcomes.iter().map(|o| &o.report.scores)).expect("nonempty folds");
    Ok(ExperimentReport {
        setup,
        folds: outcomes,
        aggregate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationExperiment {
    pub topics: Vec<CorrelationReport>,
    pub average: CorrelationReport,
}

/// Pearson and Spearman correlation between source similarities and graded
/// gold scores, per test topic of each fold, macro-averaged over topics.
pub fn run_correlations(
    corpus: &AfsCorpus,
    folds: &[FoldPlan],
    provider: &dyn SourceProvider,
) -> Result<CorrelationExperiment> {
    let per_fold: Vec<Vec<CorrelationReport>> = folds
        .par_iter()
        .map(|plan| {
            let train = plan.non_test_topics();
            let source = provider.source(&SourceRequest {
                fold_id: plan.fold_id,
                train_topics: &train,
                size: None,
                repetition: None,
            })?;
            plan.test_topics
                .iter()
                .map(|topic| {
                    let pairs: Vec<_> = corpus.pairs_in_topic(topic).collect();
                    let scores = source.pair_scores(corpus, pairs.iter().copied())?;
                    let predicted: Vec<f64> = scores.iter().map(|s| s.1).collect();
                    let gold: Vec<f64> = pairs.iter().map(|p| p.gold).collect();
                    correlation_report(topic, &predicted, &gold)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut topics: Vec<CorrelationReport> = per_fold.into_iter().flatten().collect();
    topics.sort_by(|a, b| a.topic.cmp(&b.topic));
    if topics.is_empty() {
        return Err(Error::InsufficientData("no test topics".into()));
    }
    let average = macro_average(&topics);
    Ok(CorrelationExperiment { topics, average })
}
