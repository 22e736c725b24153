use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use argclust::annotation::{
    estimate_human_performance, krippendorff_alpha, label_distribution, load_annotations, mace_consolidate,
    write_competence, write_gold, AnnotationRecord, DistanceSpec, HumanClusteringConfig, HumanMode, MaceConfig,
};
use argclust::clustering::{agglomerative_cluster, ThresholdScope, TopicTrees};
use argclust::corpus::{
    load_pair_corpus, make_afs_folds, make_aspect_folds, AfsCorpus, AspectCorpus, CorpusFormat, FoldPlan,
    LoadOptions,
};
use argclust::evaluation::{
    aggregate_classification, default_grid, evaluate_stance_predictions, learning_curve,
    load_stance_gold, load_stance_predictions, random_baseline, transitivity_report, tune_direct_threshold, Setup,
};
use argclust::experiment::{run_correlations, run_cross_topic, ExperimentConfig, GridSpec, TuningSplit};
use argclust::similarity::{EmbeddingTable, ScoreMatrix, StopwordList, TfIdfConfig};

use crate::config::{data_path, require, Options};
use crate::output::{num, opt, Table};
use crate::source::{CliProvider, SourceSpec};

/// What a command produced: the JSON result, the text report body and any
/// extra files.
pub struct Outcome {
    pub result: serde_json::Value,
    pub text: String,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new<T: Serialize>(result: &T, tables: &[Table]) -> Result<Self> {
        Ok(Outcome {
            result: serde_json::to_value(result)?,
            text: tables.iter().map(Table::render).collect::<Vec<_>>().join("\n"),
            files: Vec::new(),
        })
    }
}

fn path_option(value: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    Ok(data_path(require(value, flag)?))
}

fn load_aspect(opts: &mut Options) -> Result<AspectCorpus> {
    let path = path_option(&opts.corpus, "corpus")?;
    let format: CorpusFormat = opts.format.get_or_insert_with(|| "aspect-tsv".into()).parse()?;
    let lax = opts.lax();
    Ok(load_pair_corpus(&path, format, LoadOptions { lax })?.into_aspect()?)
}

fn load_afs(opts: &mut Options) -> Result<AfsCorpus> {
    let path = path_option(&opts.corpus, "corpus")?;
    let format: CorpusFormat = opts.format.get_or_insert_with(|| "afs-csv".into()).parse()?;
    let lax = opts.lax();
    Ok(load_pair_corpus(&path, format, LoadOptions { lax })?.into_afs()?)
}

fn load_records(opts: &mut Options) -> Result<Vec<AnnotationRecord>> {
    let path = path_option(&opts.annotations, "annotations")?;
    let lax = opts.lax();
    Ok(load_annotations(&path, lax)?)
}

fn mace_config(opts: &mut Options) -> MaceConfig {
    MaceConfig {
        threshold: opts.mace_threshold(),
        em_iterations: opts.em_iterations(),
        restarts: opts.restarts(),
        smoothing: opts.smoothing(),
        seed: opts.seed(),
    }
}

fn provider<'c, G: Sync>(opts: &mut Options, corpus: &'c argclust::corpus::PairCorpus<G>) -> Result<CliProvider<'c, G>> {
    let spec: SourceSpec = require(&opts.source, "source")?.parse()?;
    let tfidf = if spec == SourceSpec::TfIdf {
        TfIdfConfig {
            vocab_size: opts.vocab_size(),
            stopwords: opts.stopwords().parse::<StopwordList>()?,
        }
    } else {
        TfIdfConfig::default()
    };
    Ok(CliProvider::new(spec, corpus, tfidf, opts.missing_score))
}

fn experiment_config(opts: &mut Options) -> Result<ExperimentConfig> {
    let grid = match &opts.grid {
        Some(g) => GridSpec::Explicit(g.clone()),
        None => GridSpec::Auto { points: opts.grid_points() },
    };
    Ok(ExperimentConfig {
        grid,
        tuning: opts.tuning().parse::<TuningSplit>()?,
        scope: opts.scope().parse::<ThresholdScope>()?,
    })
}

fn aspect_folds(opts: &mut Options, corpus: &AspectCorpus) -> Result<Vec<FoldPlan>> {
    let (k, dev, seed) = (opts.folds(), opts.dev_topics(), opts.seed());
    Ok(make_aspect_folds(corpus.topic_ids().iter(), k, dev, seed)?)
}

fn selected_topics(opts: &Options, corpus_topics: BTreeSet<String>) -> Result<BTreeSet<String>> {
    match &opts.topics {
        None => Ok(corpus_topics),
        Some(list) => {
            let chosen: BTreeSet<String> = list.iter().cloned().collect();
            if let Some(t) = chosen.iter().find(|t| !corpus_topics.contains(*t)) {
                return Err(argclust::Error::Missing { kind: "topic", id: t.clone() }.into());
            }
            Ok(chosen)
        }
    }
}

#[derive(Serialize)]
struct CrossTopicResult {
    folds: Vec<FoldPlan>,
    report: argclust::experiment::ExperimentReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    random_baseline: Option<argclust::evaluation::EvalReport>,
}

pub fn eval_setup(opts: &mut Options, setup: Setup) -> Result<Outcome> {
    let corpus = load_aspect(opts)?;
    let folds = aspect_folds(opts, &corpus)?;
    let config = experiment_config(opts)?;
    let provider = provider(opts, &corpus)?;
    let report = run_cross_topic(&corpus, &folds, &provider, setup, &config)?;

    let random_baseline = match setup {
        Setup::WithoutClustering => {
            let test: BTreeSet<String> = folds.iter().flat_map(|f| f.test_topics.iter().cloned()).collect();
            let gold = corpus
                .pairs_in_topics(&test)
                .filter_map(|p| p.gold.map(|g| (p.pair_id.clone(), argclust::corpus::binarize(g))))
                .collect();
            Some(random_baseline(&gold, opts.seed(), opts.repetitions())?)
        }
        Setup::WithClustering => None,
    };

    let mut t = Table::new(&format!("{setup} F scores"), &["fold", "threshold", "f_sim", "f_dissim", "f_mean", "pairs"]);
    for f in &report.folds {
        let s = &f.report.scores;
        t.row(vec![
            f.fold_id.to_string(),
            num(f.threshold.threshold),
            num(s.f_sim),
            num(s.f_dissim),
            num(s.f_mean),
            s.n_pairs.to_string(),
        ]);
    }
    let a = &report.aggregate;
    t.row(vec!["mean".into(), "-".into(), num(a.f_sim), num(a.f_dissim), num(a.f_mean), a.n_pairs.to_string()]);
    if let Some(b) = &random_baseline {
        let s = &b.scores;
        t.row(vec!["random".into(), "-".into(), num(s.f_sim), num(s.f_dissim), num(s.f_mean), s.n_pairs.to_string()]);
    }
    Outcome::new(&CrossTopicResult { folds, report, random_baseline }, &[t])
}

#[derive(Serialize)]
struct TuneResult {
    topics: BTreeSet<String>,
    grid_size: usize,
    without_clustering: argclust::clustering::TunedThreshold,
    with_clustering: argclust::clustering::TunedThreshold,
}

pub fn tune(opts: &mut Options) -> Result<Outcome> {
    let corpus = load_aspect(opts)?;
    let topics = selected_topics(opts, corpus.topic_ids())?;
    let scope: ThresholdScope = opts.scope().parse()?;
    let provider = provider(opts, &corpus)?;
    let source = provider.unfolded(&topics)?;

    let labeled: Vec<_> = corpus.pairs_in_topics(&topics).filter(|p| p.gold.is_some()).collect();
    let gold = labeled
        .iter()
        .map(|p| (p.pair_id.clone(), argclust::corpus::binarize(p.gold.expect("filtered"))))
        .collect();
    let scores: BTreeMap<String, f64> = source.pair_scores(&corpus, labeled.iter().copied())?.into_iter().collect();
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => default_grid(scores.values().copied(), opts.grid_points())?,
    };
    let without = tune_direct_threshold(&scores, &gold, &grid)?;
    let with = TopicTrees::build(&corpus, &topics, &source)?.tune(&grid, scope)?;

    let mut t = Table::new("tuned thresholds", &["setup", "threshold", "f_mean"]);
    t.row(vec![Setup::WithoutClustering.to_string(), num(without.threshold), num(without.objective)]);
    t.row(vec![Setup::WithClustering.to_string(), num(with.threshold), num(with.objective)]);
    let result = TuneResult {
        topics,
        grid_size: grid.len(),
        without_clustering: without,
        with_clustering: with,
    };
    Outcome::new(&result, &[t])
}

#[derive(Serialize)]
struct TopicClusters {
    n_sentences: usize,
    n_clusters: usize,
    clusters: Vec<Vec<String>>,
    merge_trace: Vec<argclust::clustering::Merge>,
}

pub fn cluster(opts: &mut Options) -> Result<Outcome> {
    let corpus = load_aspect(opts)?;
    let topics = selected_topics(opts, corpus.topic_ids())?;
    let threshold = opts.threshold();
    let provider = provider(opts, &corpus)?;
    let source = provider.unfolded(&topics)?;

    let mut result = BTreeMap::new();
    let mut t = Table::new(&format!("clusters at threshold {}", num(threshold)), &["topic", "sentences", "clusters"]);
    for topic in &topics {
        let sentences = corpus.topic_sentences(topic);
        let c = agglomerative_cluster(&sentences, &source, threshold)?;
        let clusters: Vec<Vec<String>> =
            c.clusters().into_iter().map(|g| g.into_iter().map(str::to_string).collect()).collect();
        t.row(vec![topic.clone(), sentences.len().to_string(), clusters.len().to_string()]);
        result.insert(
            topic.clone(),
            TopicClusters {
                n_sentences: sentences.len(),
                n_clusters: clusters.len(),
                clusters,
                merge_trace: c.merge_trace,
            },
        );
    }
    Outcome::new(&result, &[t])
}

pub fn correlations(opts: &mut Options) -> Result<Outcome> {
    let corpus = load_afs(opts)?;
    let folds = make_afs_folds(corpus.topic_ids().iter())?;
    let provider = provider(opts, &corpus)?;
    let result = run_correlations(&corpus, &folds, &provider)?;
    let mut t = Table::new("correlation with graded gold", &["topic", "pairs", "pearson_r", "spearman_rho"]);
    for r in result.topics.iter().chain(std::iter::once(&result.average)) {
        t.row(vec![r.topic.clone(), r.n.to_string(), opt(r.pearson_r), opt(r.spearman_rho)]);
    }
    Outcome::new(&result, &[t])
}

#[derive(Serialize)]
struct TransitivityResult {
    overall: argclust::evaluation::TransitivityReport,
    topics: BTreeMap<String, argclust::evaluation::TransitivityReport>,
}

pub fn transitivity(opts: &mut Options) -> Result<Outcome> {
    let corpus = load_aspect(opts)?;
    let gold = corpus.binary_gold();
    let overall = transitivity_report(&gold, corpus.pairs());
    let topics: BTreeMap<String, _> = corpus
        .topic_ids()
        .into_iter()
        .map(|t| {
            let r = transitivity_report(&gold, corpus.pairs_in_topic(&t));
            (t, r)
        })
        .collect();
    let mut table = Table::new("transitivity of gold labels", &["topic", "triples", "violated", "fraction", "duplicates"]);
    for (name, r) in topics.iter().chain(std::iter::once((&"all".to_string(), &overall))) {
        table.row(vec![
            name.clone(),
            r.total_triples.to_string(),
            r.violated.to_string(),
            num(r.fraction),
            r.duplicate_pairs.to_string(),
        ]);
    }
    Outcome::new(&TransitivityResult { overall, topics }, &[table])
}

pub fn learning_curve_cmd(opts: &mut Options) -> Result<Outcome> {
    let corpus = load_aspect(opts)?;
    let folds = aspect_folds(opts, &corpus)?;
    let config = experiment_config(opts)?;
    let sizes = match &opts.sizes {
        Some(s) => s.clone(),
        None => {
            let max = folds.iter().map(|f| f.train_topics.len()).min().unwrap_or(0);
            let sizes: Vec<usize> = (1..=max).collect();
            opts.sizes = Some(sizes.clone());
            sizes
        }
    };
    let (reps, seed) = (opts.repetitions(), opts.seed());
    let provider = provider(opts, &corpus)?;
    let curve = learning_curve(&corpus, &folds, &sizes, reps, seed, &provider, &config)?;
    let mut t = Table::new("learning curve", &["train_topics", "f_mean_without", "f_mean_with", "runs"]);
    for p in &curve {
        t.row(vec![p.size.to_string(), num(p.f_mean_without), num(p.f_mean_with), p.runs.to_string()]);
    }
    Outcome::new(&curve, &[t])
}

#[derive(Serialize)]
struct ClassificationResult {
    reports: Vec<argclust::evaluation::ClassificationReport>,
    summary: argclust::evaluation::ClassificationSummary,
}

pub fn eval_classification(opts: &mut Options) -> Result<Outcome> {
    let gold = load_stance_gold(&path_option(&opts.gold, "gold")?)?;
    let pred = load_stance_predictions(&path_option(&opts.predictions, "predictions")?)?;
    let reports = evaluate_stance_predictions(&gold, &pred)?;
    let summary = aggregate_classification(&reports)?;
    let header = ["topic", "seed", "macro_f1", "p_arg+", "p_arg-", "r_arg+", "r_arg-"];
    let mut t = Table::new("stance classification", &header);
    for r in &reports {
        t.row(vec![
            r.topic.clone(),
            r.seed.to_string(),
            num(r.macro_f1),
            num(r.p_arg_plus),
            num(r.p_arg_minus),
            num(r.r_arg_plus),
            num(r.r_arg_minus),
        ]);
    }
    let s = &summary;
    t.row(vec![
        format!("mean of {} topics", s.n_topics),
        format!("{} seeds", s.n_seeds),
        num(s.macro_f1),
        num(s.p_arg_plus),
        num(s.p_arg_minus),
        num(s.r_arg_plus),
        num(s.r_arg_minus),
    ]);
    Outcome::new(&ClassificationResult { reports, summary }, &[t])
}

#[derive(Serialize)]
struct ConsolidateResult {
    n_items: usize,
    n_workers: usize,
    n_records: usize,
    retained: usize,
    retained_fraction: f64,
    log_objective: f64,
    best_restart: usize,
    label_distribution: BTreeMap<argclust::corpus::GradedLabel, f64>,
    competence: BTreeMap<String, f64>,
}

pub fn consolidate(opts: &mut Options) -> Result<Outcome> {
    let records = load_records(opts)?;
    let config = mace_config(opts);
    let r = mace_consolidate(&records, &config)?;
    let distribution = label_distribution(&r.gold)?;

    let mut gold_tsv = Vec::new();
    write_gold(&r, &mut gold_tsv)?;
    let mut competence_tsv = Vec::new();
    write_competence(&r, &mut competence_tsv)?;

    let mut t = Table::new("MACE consolidation", &["items", "workers", "retained", "log_objective"]);
    t.row(vec![
        r.confidence.len().to_string(),
        r.competence.len().to_string(),
        r.gold.len().to_string(),
        format!("{:.6}", r.log_objective),
    ]);
    let mut d = Table::new("gold label distribution", &["label", "fraction"]);
    for (label, f) in &distribution {
        d.row(vec![label.to_string(), num(*f)]);
    }
    let result = ConsolidateResult {
        n_items: r.confidence.len(),
        n_workers: r.competence.len(),
        n_records: records.len(),
        retained: r.gold.len(),
        retained_fraction: r.retained_fraction,
        log_objective: r.log_objective,
        best_restart: r.best_restart,
        label_distribution: distribution,
        competence: r.competence.clone(),
    };
    let mut out = Outcome::new(&result, &[t, d])?;
    out.files.push(("gold.tsv".into(), gold_tsv));
    out.files.push(("competence.tsv".into(), competence_tsv));
    Ok(out)
}

#[derive(Serialize)]
struct AgreementResult {
    n_items: usize,
    n_workers: usize,
    n_records: usize,
    alpha_binary: f64,
    alpha_weighted: f64,
}

pub fn agreement(opts: &mut Options) -> Result<Outcome> {
    let records = load_records(opts)?;
    let result = AgreementResult {
        n_items: records.iter().map(|r| r.pair_id.as_str()).collect::<BTreeSet<_>>().len(),
        n_workers: records.iter().map(|r| r.worker_id.as_str()).collect::<BTreeSet<_>>().len(),
        n_records: records.len(),
        alpha_binary: krippendorff_alpha(&records, &DistanceSpec::binary())?,
        alpha_weighted: krippendorff_alpha(&records, &DistanceSpec::weighted())?,
    };
    let mut t = Table::new("Krippendorff's alpha", &["distance", "alpha"]);
    t.row(vec!["binary".into(), num(result.alpha_binary)]);
    t.row(vec!["weighted".into(), num(result.alpha_weighted)]);
    Outcome::new(&result, &[t])
}

pub fn human_performance(opts: &mut Options) -> Result<Outcome> {
    let records = load_records(opts)?;
    let config = mace_config(opts);
    let (reps, seed) = (opts.repetitions(), opts.seed());
    let (mode, corpus) = if opts.with_clustering() {
        let cfg = HumanClusteringConfig {
            scores: opts.mace_scores().parse()?,
            threshold: opts.threshold(),
            missing_score: *opts.missing_score.get_or_insert(0.0),
        };
        (HumanMode::WithClustering(cfg), Some(load_aspect(opts)?))
    } else {
        (HumanMode::WithoutClustering, None)
    };
    let h = estimate_human_performance(&records, corpus.as_ref(), reps, seed, &config, mode)?;
    let mut t = Table::new(
        &format!("human performance, {}", h.report.setup),
        &["repetition", "f_sim", "f_dissim", "f_mean"],
    );
    for (i, s) in h.per_repetition.iter().enumerate() {
        t.row(vec![i.to_string(), num(s.f_sim), num(s.f_dissim), num(s.f_mean)]);
    }
    let s = &h.report.scores;
    t.row(vec!["mean".into(), num(s.f_sim), num(s.f_dissim), num(s.f_mean)]);
    Outcome::new(&h, &[t])
}

#[derive(Serialize, Default)]
struct ValidateResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<BTreeMap<&'static str, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    annotations: Option<BTreeMap<&'static str, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embeddings: Option<BTreeMap<&'static str, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scores: Option<BTreeMap<&'static str, usize>>,
}

fn validate_scores(path: &Path, corpus: Option<&argclust::corpus::LoadedCorpus>) -> Result<BTreeMap<&'static str, usize>> {
    let scores = ScoreMatrix::load(path)?;
    let mut stats = BTreeMap::from([("entries", scores.len())]);
    let missing = match corpus {
        Some(argclust::corpus::LoadedCorpus::Aspect(c)) => Some(count_unscored(&scores.bind(c)?, c)),
        Some(argclust::corpus::LoadedCorpus::Afs(c)) => Some(count_unscored(&scores.bind(c)?, c)),
        None => None,
    };
    if let Some(m) = missing {
        stats.insert("corpus_pairs_without_score", m);
    }
    Ok(stats)
}

fn count_unscored<G>(bound: &ScoreMatrix, corpus: &argclust::corpus::PairCorpus<G>) -> usize {
    corpus.pairs().iter().filter(|p| bound.sentence_similarity(&p.a, &p.b).is_err()).count()
}

pub fn validate(opts: &mut Options) -> Result<Outcome> {
    let mut result = ValidateResult::default();
    let lax = opts.lax();
    let mut loaded = None;
    if let Some(p) = &opts.corpus {
        let format: CorpusFormat = opts.format.get_or_insert_with(|| "aspect-tsv".into()).parse()?;
        let c = load_pair_corpus(&data_path(p), format, LoadOptions { lax })?;
        let (pairs, topics, sentences) = match &c {
            argclust::corpus::LoadedCorpus::Aspect(c) => (c.len(), c.topics().len(), c.sentences().len()),
            argclust::corpus::LoadedCorpus::Afs(c) => (c.len(), c.topics().len(), c.sentences().len()),
        };
        result.corpus = Some(BTreeMap::from([("pairs", pairs), ("topics", topics), ("sentences", sentences)]));
        loaded = Some(c);
    }
    if let Some(p) = &opts.annotations {
        let records = load_annotations(&data_path(p), lax)?;
        let items = records.iter().map(|r| r.pair_id.as_str()).collect::<BTreeSet<_>>().len();
        result.annotations = Some(BTreeMap::from([("records", records.len()), ("items", items)]));
    }
    if let Some(p) = &opts.embeddings {
        let table = EmbeddingTable::load(&data_path(p))?;
        result.embeddings = Some(BTreeMap::from([("vectors", table.len()), ("dim", table.dim())]));
    }
    if let Some(p) = &opts.scores {
        result.scores = Some(validate_scores(&data_path(p), loaded.as_ref())?);
    }
    if result.corpus.is_none() && result.annotations.is_none() && result.embeddings.is_none() && result.scores.is_none() {
        return Err(crate::UsageError("validate needs --corpus, --annotations, --embeddings or --scores".into()).into());
    }
    let mut t = Table::new("valid inputs", &["file", "statistic", "value"]);
    for (name, stats) in [
        ("corpus", &result.corpus),
        ("annotations", &result.annotations),
        ("embeddings", &result.embeddings),
        ("scores", &result.scores),
    ] {
        for (k, v) in stats.iter().flatten() {
            t.row(vec![name.to_string(), k.to_string(), v.to_string()]);
        }
    }
    Outcome::new(&result, &[t]).context("rendering validation report")
}
