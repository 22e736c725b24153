//! Run options: command-line flags layered over an optional TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming the directory that relative data paths fall
/// back to when they do not exist relative to the working directory.
pub const DATA_DIR_ENV: &str = "ARGCLUST_DATA_DIR";

/// Every tunable value. Each subcommand reads the fields it needs; the
/// resolved values (defaults included) are echoed into its outputs.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Pair corpus: ASPECT-style TSV or AFS-style CSV
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus format: aspect-tsv or afs-csv
    #[arg(long)]
    pub format: Option<String>,
    /// Accept undeclared columns in input files
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lax: Option<bool>,
    /// Raw annotation TSV (pair_id, worker_id, label)
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// Similarity source: tfidf, embeddings:PATH or scores:PATH; paths may
    /// contain {fold}, {size} and {rep} placeholders
    #[arg(long)]
    pub source: Option<String>,
    /// Similarity assumed for sentence pairs absent from a score file
    #[arg(long)]
    pub missing_score: Option<f64>,
    /// Tf-Idf vocabulary size
    #[arg(long)]
    pub vocab_size: Option<usize>,
    /// Tf-Idf stopword list: english_v1 or none
    #[arg(long)]
    pub stopwords: Option<String>,
    /// Number of cross-topic folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Development topics per fold
    #[arg(long)]
    pub dev_topics: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit threshold grid, comma separated
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Points of the automatic threshold grid
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Topics used for tuning: non-test, train or dev
    #[arg(long)]
    pub tuning: Option<String>,
    /// Threshold tuning scope: global or per-topic-mean
    #[arg(long)]
    pub scope: Option<String>,
    /// Clustering stopping threshold
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Restrict to these topics, comma separated
    #[arg(long, value_delimiter = ',')]
    pub topics: Option<Vec<String>>,
    /// Fraction of items MACE keeps
    #[arg(long)]
    pub mace_threshold: Option<f64>,
    #[arg(long)]
    pub em_iterations: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// MACE additive smoothing
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Repetitions of randomised procedures
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Human performance: cluster the predicting group's MACE scores
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub with_clustering: Option<bool>,
    /// MACE scores driving human clustering: binary-labels or similarity-posterior
    #[arg(long)]
    pub mace_scores: Option<String>,
    /// Learning-curve training sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Stance gold TSV (sentence_id, topic, label)
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Stance predictions TSV (sentence_id, label, seed)
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Embedding file to validate
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Score file to validate
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Worker threads; does not affect results
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Options {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Values set in `flags` win over values set here.
    pub fn overlay(self, flags: &Options) -> Result<Self> {
        let mut base = serde_json::to_value(self)?;
        let top = serde_json::to_value(flags)?;
        let (Some(base_map), Some(top_map)) = (base.as_object_mut(), top.as_object()) else {
            bail!("options must serialize to a map");
        };
        for (k, v) in top_map {
            if !v.is_null() {
                base_map.insert(k.clone(), v.clone());
            }
        }
        Ok(serde_json::from_value(base)?)
    }

    /// Resolved options as echoed into reports: thread count removed, unset
    /// values dropped.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(Options { jobs: None, ..self.clone() }).expect("options serialize");
        if let Some(map) = v.as_object_mut() {
            map.retain(|_, x| !x.is_null());
        }
        v
    }

    pub fn config_hash(&self, command: &str) -> String {
        let canonical = serde_json::json!({ "command": command, "config": self.echo() });
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }
}

/// Defaulting accessors. Reading a value records the default in `self`, so
/// the echoed configuration lists everything a command actually used.
macro_rules! defaulted {
    ($($name:ident: $ty:ty = $default:expr;)*) => {
        impl Options {
            $(
                pub fn $name(&mut self) -> $ty {
                    self.$name.get_or_insert_with(|| $default).clone()
                }
            )*
        }
    };
}

defaulted! {
    lax: bool = false;
    seed: u64 = 0;
    folds: usize = 4;
    dev_topics: usize = 4;
    grid_points: usize = 101;
    tuning: String = "non-test".to_string();
    scope: String = "global".to_string();
    vocab_size: usize = 50_000;
    stopwords: String = "english_v1".to_string();
    mace_threshold: f64 = 1.0;
    em_iterations: usize = 50;
    restarts: usize = 10;
    smoothing: f64 = 0.1;
    repetitions: usize = 10;
    with_clustering: bool = false;
    mace_scores: String = "binary-labels".to_string();
    threshold: f64 = 0.5;
}

/// Resolves a data path: as given if it exists, otherwise under the
/// data-directory environment variable when the path is relative.
pub fn data_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            return Path::new(&dir).join(path);
        }
    }
    path.to_path_buf()
}

pub fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    match value {
        Some(v) => Ok(v),
        None => Err(crate::UsageError(format!("missing required option --{flag}")).into()),
    }
}
