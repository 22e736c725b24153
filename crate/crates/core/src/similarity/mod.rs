//! The pairwise argument similarity `d(a, b)`.
//!
//! Three interchangeable sources are supported: Tf-Idf cosine over a model
//! built from training sentences, cosine between precomputed sentence
//! embeddings, and a precomputed score matrix (e.g. the output of a
//! fine-tuned cross-encoder). All sources are immutable after construction
//! and symmetric in their arguments.

mod embeddings;
mod scores;
mod tfidf;
mod tokenize;

pub use embeddings::{embedding_similarity, EmbeddingTable};
pub use scores::{lookup_score, sentence_pair_key, ScoreMatrix};
pub use tfidf::{tfidf_similarity, StopwordList, TfIdfConfig, TfIdfModel};
pub use tokenize::tokenize;

use crate::corpus::{ArgumentSentence, Pair, PairCorpus};
use crate::error::{Error, Result};

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (x, y) in u.iter().zip(v) {
        dot += x * y;
        uu += x * x;
        vv += y * y;
    }
    Ok(cosine_from_parts(dot, uu, vv))
}

pub(crate) fn cosine_from_parts(dot: f64, uu: f64, vv: f64) -> f64 {
    if uu == 0.0 || vv == 0.0 {
        return 0.0;
    }
    (dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0)
}

/// One of the supported similarity metrics.
#[derive(Debug, Clone)]
pub enum SimilaritySource {
    TfIdf(TfIdfModel),
    Embeddings(EmbeddingTable),
    Scores(ScoreMatrix),
}

impl SimilaritySource {
    pub fn similarity(&self, a: &ArgumentSentence, b: &ArgumentSentence) -> Result<f64> {
        match self {
            SimilaritySource::TfIdf(m) => Ok(m.similarity(&a.text, &b.text)),
            SimilaritySource::Embeddings(t) => t.similarity(&a.id, &b.id),
            SimilaritySource::Scores(s) => s.sentence_similarity(&a.id, &b.id),
        }
    }

    /// Scores of the given corpus pairs, keyed by pair id.
    pub fn pair_scores<'a, G: 'a>(
        &self,
        corpus: &PairCorpus<G>,
        pairs: impl IntoIterator<Item = &'a Pair<G>>,
    ) -> Result<Vec<(String, f64)>> {
        pairs
            .into_iter()
            .map(|p| {
                let s = self.similarity(corpus.sentence(&p.a)?, corpus.sentence(&p.b)?)?;
                Ok((p.pair_id.clone(), s))
            })
            .collect()
    }

    /// Dense symmetric similarity matrix over `sentences`, in the given order.
    pub fn matrix(&self, sentences: &[&ArgumentSentence]) -> Result<SimilarityMatrix> {
        let n = sentences.len();
        let mut values = vec![0.0; n * n];
        let tfidf_vectors = match self {
            SimilaritySource::TfIdf(m) => Some(sentences.iter().map(|s| m.vector(&s.text)).collect::<Vec<_>>()),
            _ => None,
        };
        for i in 0..n {
            values[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let s = match &tfidf_vectors {
                    Some(v) => v[i].cosine(&v[j]),
                    None => self.similarity(sentences[i], sentences[j])?,
                };
                if !s.is_finite() {
                    return Err(Error::invalid(format!(
                        "non-finite similarity between `{}` and `{}`",
                        sentences[i].id, sentences[j].id
                    )));
                }
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Ok(SimilarityMatrix {
            ids: sentences.iter().map(|s| s.id.clone()).collect(),
            values,
        })
    }
}

/// Symmetric pairwise similarities over a list of sentence ids. The diagonal
/// is never read by the clustering code.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Builds a matrix from ids and a row-major `n × n` value buffer. The
    /// buffer must be symmetric and finite off the diagonal.
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (x, y) = (values[i * n + j], values[j * n + i]);
                if !x.is_finite() || x != y {
                    return Err(Error::invalid(format!("similarity matrix not symmetric/finite at ({i}, {j})")));
                }
            }
        }
        Ok(SimilarityMatrix { ids, values })
    }

    /// Builds a matrix from a function of index pairs `(i, j)` with `i < j`.
    pub fn from_fn(ids: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = ids.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let s = f(i, j);
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Self::new(ids, values)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }
}
