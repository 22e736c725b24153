use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use super::tokenize::tokenize;
use crate::error::{Error, Result};

const ENGLISH_V1: &str = include_str!("../../data/stopwords_en_v1.txt");

/// Stopword list applied before vocabulary selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopwordList {
    None,
    /// The bundled 318-word English list, `data/stopwords_en_v1.txt`.
    EnglishV1,
    Custom(Vec<String>),
}

impl StopwordList {
    pub fn id(&self) -> &str {
        match self {
            StopwordList::None => "none",
            StopwordList::EnglishV1 => "english_v1",
            StopwordList::Custom(_) => "custom",
        }
    }

    fn words(&self) -> HashSet<String> {
        match self {
            StopwordList::None => HashSet::new(),
            StopwordList::EnglishV1 => ENGLISH_V1.lines().map(str::trim).filter(|w| !w.is_empty()).map(String::from).collect(),
            StopwordList::Custom(words) => words.iter().map(|w| w.to_lowercase()).collect(),
        }
    }
}

impl std::str::FromStr for StopwordList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(StopwordList::None),
            "english_v1" | "english" => Ok(StopwordList::EnglishV1),
            other => Err(Error::invalid(format!("unknown stopword list `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TfIdfConfig {
    pub vocab_size: usize,
    pub stopwords: StopwordList,
}

impl Default for TfIdfConfig {
    fn default() -> Self {
        TfIdfConfig {
            vocab_size: 50_000,
            stopwords: StopwordList::EnglishV1,
        }
    }
}

/// A frozen Tf-Idf model: vocabulary of the most document-frequent
/// non-stopword training tokens, with smoothed idf
/// `ln((1 + D) / (1 + df)) + 1`.
#[derive(Debug, Clone)]
pub struct TfIdfModel {
    vocabulary: HashMap<String, usize>,
    idf: Vec<f64>,
    n_documents: usize,
    config: TfIdfConfig,
}

/// Sparse tf·idf vector, sorted by term index.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    norm_sq: f64,
}

impl SparseVector {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn cosine(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < self.entries.len() && j < other.entries.len() {
            let (a, b) = (self.entries[i], other.entries[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a.1 * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        super::cosine_from_parts(dot, self.norm_sq, other.norm_sq)
    }
}

impl TfIdfModel {
    pub fn build<S: AsRef<str>>(train_sentences: &[S], config: TfIdfConfig) -> Result<Self> {
        if train_sentences.is_empty() {
            return Err(Error::InsufficientData("empty Tf-Idf training corpus".into()));
        }
        if config.vocab_size == 0 {
            return Err(Error::invalid("vocabulary size must be positive"));
        }
        let stop = config.stopwords.words();
        let mut df: HashMap<String, usize> = HashMap::new();
        for s in train_sentences {
            let distinct: HashSet<String> = tokenize(s.as_ref()).into_iter().collect();
            for t in distinct {
                if !stop.contains(&t) {
                    *df.entry(t).or_default() += 1;
                }
            }
        }
        if df.is_empty() {
            return Err(Error::InsufficientData(
                "vocabulary is empty after stopword removal".into(),
            ));
        }
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(config.vocab_size);

        let n = train_sentences.len();
        let idf = ranked
            .iter()
            .map(|(_, df)| ((1.0 + n as f64) / (1.0 + *df as f64)).ln() + 1.0)
            .collect();
        let vocabulary = ranked.into_iter().enumerate().map(|(i, (t, _))| (t, i)).collect();
        Ok(TfIdfModel {
            vocabulary,
            idf,
            n_documents: n,
            config,
        })
    }

    pub fn config(&self) -> &TfIdfConfig {
        &self.config
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.vocabulary.get(token).copied()
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.index_of(token).map(|i| self.idf[i])
    }

    /// Raw term frequency times idf over in-vocabulary tokens.
    pub fn vector(&self, text: &str) -> SparseVector {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokenize(text) {
            if let Some(&i) = self.vocabulary.get(&t) {
                *tf.entry(i).or_default() += 1.0;
            }
        }
        let entries: Vec<(usize, f64)> = tf.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect();
        let norm_sq = entries.iter().map(|(_, w)| w * w).sum();
        SparseVector { entries, norm_sq }
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        self.vector(a).cosine(&self.vector(b))
    }
}

pub fn tfidf_similarity(model: &TfIdfModel, a: &str, b: &str) -> f64 {
    model.similarity(a, b)
}
