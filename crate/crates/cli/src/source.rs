//! `--source` specifications and the provider that materialises them.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use argclust::corpus::PairCorpus;
use argclust::experiment::{SourceProvider, SourceRequest};
use argclust::similarity::{EmbeddingTable, ScoreMatrix, SimilaritySource, TfIdfConfig, TfIdfModel};
use argclust::Error;

use crate::config::data_path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    TfIdf,
    Embeddings(String),
    Scores(String),
}

impl FromStr for SourceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.split_once(':') {
            None if s == "tfidf" => Ok(SourceSpec::TfIdf),
            Some(("embeddings", path)) if !path.is_empty() => Ok(SourceSpec::Embeddings(path.to_string())),
            Some(("scores", path)) if !path.is_empty() => Ok(SourceSpec::Scores(path.to_string())),
            _ => Err(Error::InvalidArgument(format!(
                "source `{s}` is not tfidf, embeddings:PATH or scores:PATH"
            ))),
        }
    }
}

/// Substitutes `{fold}`, `{size}` and `{rep}`; a placeholder without a
/// value is an error.
pub fn fill_template(template: &str, fold: Option<usize>, size: Option<usize>, rep: Option<usize>) -> Result<String, Error> {
    let mut out = template.to_string();
    for (key, value) in [("{fold}", fold), ("{size}", size), ("{rep}", rep)] {
        if out.contains(key) {
            match value {
                Some(v) => out = out.replace(key, &v.to_string()),
                None => {
                    return Err(Error::InvalidArgument(format!(
                        "source path `{template}` uses {key}, which this command does not provide"
                    )))
                }
            }
        }
    }
    Ok(out)
}

pub struct CliProvider<'c, G> {
    pub spec: SourceSpec,
    pub corpus: &'c PairCorpus<G>,
    pub tfidf: TfIdfConfig,
    pub missing_score: Option<f64>,
    cache: Mutex<BTreeMap<PathBuf, Arc<SimilaritySource>>>,
}

impl<'c, G: Sync> CliProvider<'c, G> {
    pub fn new(spec: SourceSpec, corpus: &'c PairCorpus<G>, tfidf: TfIdfConfig, missing_score: Option<f64>) -> Self {
        CliProvider {
            spec,
            corpus,
            tfidf,
            missing_score,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    fn load(&self, template: &str, fold: Option<usize>, size: Option<usize>, rep: Option<usize>) -> Result<Arc<SimilaritySource>, Error> {
        let path = data_path(PathBuf::from(fill_template(template, fold, size, rep)?).as_path());
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&path) {
            return Ok(Arc::clone(hit));
        }
        let source = match &self.spec {
            SourceSpec::Embeddings(_) => SimilaritySource::Embeddings(EmbeddingTable::load(&path)?),
            SourceSpec::Scores(_) => {
                let raw = ScoreMatrix::load(&path)?.with_missing_score(self.missing_score);
                SimilaritySource::Scores(raw.bind(self.corpus)?)
            }
            SourceSpec::TfIdf => unreachable!("tf-idf sources are not file backed"),
        };
        let source = Arc::new(source);
        self.cache.lock().expect("cache lock").insert(path, Arc::clone(&source));
        Ok(source)
    }

    /// Source for commands without folds; Tf-Idf learns from the given topics.
    pub fn unfolded(&self, topics: &std::collections::BTreeSet<String>) -> Result<Arc<SimilaritySource>, Error> {
        match &self.spec {
            SourceSpec::TfIdf => self.tfidf_for(topics),
            SourceSpec::Embeddings(t) | SourceSpec::Scores(t) => self.load(t, None, None, None),
        }
    }

    fn tfidf_for(&self, topics: &std::collections::BTreeSet<String>) -> Result<Arc<SimilaritySource>, Error> {
        let texts = self.corpus.texts_in_topics(topics);
        Ok(Arc::new(SimilaritySource::TfIdf(TfIdfModel::build(&texts, self.tfidf.clone())?)))
    }
}

impl<G: Sync> SourceProvider for CliProvider<'_, G> {
    fn source(&self, request: &SourceRequest<'_>) -> argclust::Result<Arc<SimilaritySource>> {
        match &self.spec {
            SourceSpec::TfIdf => self.tfidf_for(request.train_topics),
            SourceSpec::Embeddings(t) | SourceSpec::Scores(t) => {
                self.load(t, Some(request.fold_id), request.size, request.repetition)
            }
        }
    }
}
