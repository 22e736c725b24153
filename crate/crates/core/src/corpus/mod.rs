//! Pair-annotated argument corpora: domain types, loaders, binarization and
//! cross-topic fold planning.

mod folds;
mod io;

pub use folds::{make_afs_folds, make_aspect_folds, make_within_topic_folds, FoldPlan, PairSplit};
pub use io::{
    load_pair_corpus, read_pair_corpus, write_afs_corpus, write_aspect_corpus, CorpusFormat,
    LoadOptions, LoadedCorpus,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    Pro,
    Con,
    None,
    Unknown,
}

impl FromStr for Stance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pro" | "argument_for" | "arg+" => Ok(Stance::Pro),
            "con" | "argument_against" | "arg-" => Ok(Stance::Con),
            "none" | "noargument" | "no_argument" | "non-arg" => Ok(Stance::None),
            "unknown" => Ok(Stance::Unknown),
            other => Err(Error::invalid(format!("unknown stance label `{other}`"))),
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stance::Pro => "pro",
            Stance::Con => "con",
            Stance::None => "none",
            Stance::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentSentence {
    pub id: String,
    pub topic_id: String,
    pub text: String,
    pub stance: Stance,
}

impl ArgumentSentence {
    /// A sentence whose id is the content hash of `(topic_id, text)`.
    pub fn new(topic_id: &str, text: &str) -> Self {
        ArgumentSentence {
            id: sentence_id(topic_id, text),
            topic_id: topic_id.to_string(),
            text: text.to_string(),
            stance: Stance::Unknown,
        }
    }
}

/// Content-derived sentence id: 16 hex digits of SHA-256 over topic and text.
pub fn sentence_id(topic_id: &str, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(topic_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(text.as_bytes());
    hex::encode(&hasher.finalize()[..8])
}

/// Four-way graded similarity label of an argument pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradedLabel {
    NoSimilarity,
    SomeSimilarity,
    HighSimilarity,
    DifferentTopic,
}

impl GradedLabel {
    pub const ALL: [GradedLabel; 4] = [
        GradedLabel::NoSimilarity,
        GradedLabel::SomeSimilarity,
        GradedLabel::HighSimilarity,
        GradedLabel::DifferentTopic,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Token used in the TSV formats.
    pub fn token(self) -> &'static str {
        match self {
            GradedLabel::NoSimilarity => "NS",
            GradedLabel::SomeSimilarity => "SS",
            GradedLabel::HighSimilarity => "HS",
            GradedLabel::DifferentTopic => "DTORCD",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GradedLabel::NoSimilarity => "no_similarity",
            GradedLabel::SomeSimilarity => "some_similarity",
            GradedLabel::HighSimilarity => "high_similarity",
            GradedLabel::DifferentTopic => "different_topic",
        }
    }
}

impl FromStr for GradedLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        GradedLabel::ALL
            .into_iter()
            .find(|l| l.token() == s || l.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown label token `{s}`")))
    }
}

impl fmt::Display for GradedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinaryLabel {
    Similar,
    Dissimilar,
}

impl BinaryLabel {
    pub fn is_similar(self) -> bool {
        self == BinaryLabel::Similar
    }
}

/// Some and high similarity count as similar; no similarity and different
/// topic as dissimilar.
pub fn binarize(label: GradedLabel) -> BinaryLabel {
    match label {
        GradedLabel::SomeSimilarity | GradedLabel::HighSimilarity => BinaryLabel::Similar,
        GradedLabel::NoSimilarity | GradedLabel::DifferentTopic => BinaryLabel::Dissimilar,
    }
}

/// An annotated pair of sentences from one topic. `G` is the gold
/// annotation: an optional graded label for ASPECT-style data or a real
/// score for AFS-style data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pair<G> {
    pub pair_id: String,
    pub topic_id: String,
    pub a: String,
    pub b: String,
    pub gold: G,
}

pub type ArgumentPair = Pair<Option<GradedLabel>>;
pub type GradedScorePair = Pair<f64>;

impl<G> Pair<G> {
    /// Sentence ids in canonical (sorted) order.
    pub fn sentence_key(&self) -> (&str, &str) {
        if self.a <= self.b {
            (&self.a, &self.b)
        } else {
            (&self.b, &self.a)
        }
    }
}

/// An immutable, validated set of pairs together with the topics and
/// sentences they reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorpus<G> {
    topics: BTreeMap<String, Topic>,
    sentences: BTreeMap<String, ArgumentSentence>,
    pairs: Vec<Pair<G>>,
    pair_index: HashMap<String, usize>,
}

pub type AspectCorpus = PairCorpus<Option<GradedLabel>>;
pub type AfsCorpus = PairCorpus<f64>;

impl<G> PairCorpus<G> {
    pub fn topics(&self) -> &BTreeMap<String, Topic> {
        &self.topics
    }

    pub fn topic_ids(&self) -> BTreeSet<String> {
        self.topics.keys().cloned().collect()
    }

    pub fn sentences(&self) -> &BTreeMap<String, ArgumentSentence> {
        &self.sentences
    }

    pub fn sentence(&self, id: &str) -> Result<&ArgumentSentence> {
        self.sentences.get(id).ok_or_else(|| Error::Missing {
            kind: "sentence",
            id: id.to_string(),
        })
    }

    pub fn pairs(&self) -> &[Pair<G>] {
        &self.pairs
    }

    pub fn pair(&self, pair_id: &str) -> Option<&Pair<G>> {
        self.pair_index.get(pair_id).map(|&i| &self.pairs[i])
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs_in_topic<'a>(&'a self, topic_id: &'a str) -> impl Iterator<Item = &'a Pair<G>> + 'a {
        self.pairs.iter().filter(move |p| p.topic_id == topic_id)
    }

    pub fn pairs_in_topics<'a>(
        &'a self,
        topics: &'a BTreeSet<String>,
    ) -> impl Iterator<Item = &'a Pair<G>> + 'a {
        self.pairs.iter().filter(move |p| topics.contains(&p.topic_id))
    }

    /// The clustering universe of a topic: every sentence occurring in one of
    /// its annotated pairs, sorted by id.
    pub fn topic_sentences(&self, topic_id: &str) -> Vec<&ArgumentSentence> {
        let ids: BTreeSet<&str> = self
            .pairs_in_topic(topic_id)
            .flat_map(|p| [p.a.as_str(), p.b.as_str()])
            .collect();
        ids.into_iter().map(|id| &self.sentences[id]).collect()
    }

    /// Texts of all sentences belonging to the given topics, in id order.
    pub fn texts_in_topics(&self, topics: &BTreeSet<String>) -> Vec<&str> {
        self.sentences
            .values()
            .filter(|s| topics.contains(&s.topic_id))
            .map(|s| s.text.as_str())
            .collect()
    }

    /// Restricts the corpus to the pairs accepted by `keep`.
    pub fn filter_pairs(&self, mut keep: impl FnMut(&Pair<G>) -> bool) -> Self
    where
        G: Clone,
    {
        let pairs: Vec<Pair<G>> = self.pairs.iter().filter(|p| keep(p)).cloned().collect();
        let sentence_ids: BTreeSet<&str> = pairs.iter().flat_map(|p| [p.a.as_str(), p.b.as_str()]).collect();
        let topic_ids: BTreeSet<&str> = pairs.iter().map(|p| p.topic_id.as_str()).collect();
        let pair_index = pairs.iter().enumerate().map(|(i, p)| (p.pair_id.clone(), i)).collect();
        PairCorpus {
            topics: self
                .topics
                .iter()
                .filter(|(k, _)| topic_ids.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            sentences: self
                .sentences
                .iter()
                .filter(|(k, _)| sentence_ids.contains(k.as_str()))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            pairs,
            pair_index,
        }
    }
}

impl AspectCorpus {
    /// Binarized gold labels of every labeled pair.
    pub fn binary_gold(&self) -> BTreeMap<String, BinaryLabel> {
        self.pairs
            .iter()
            .filter_map(|p| p.gold.map(|g| (p.pair_id.clone(), binarize(g))))
            .collect()
    }
}

/// Incremental, validating construction of a [`PairCorpus`].
///
/// Sentences are deduplicated by exact text within a topic.
#[derive(Debug)]
pub struct CorpusBuilder<G> {
    corpus: PairCorpus<G>,
}

impl<G> Default for CorpusBuilder<G> {
    fn default() -> Self {
        CorpusBuilder {
            corpus: PairCorpus {
                topics: BTreeMap::new(),
                sentences: BTreeMap::new(),
                pairs: Vec::new(),
                pair_index: HashMap::new(),
            },
        }
    }
}

impl<G> CorpusBuilder<G> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a pair given by its raw sentence texts. `row` is the 1-based
    /// source row used in error messages.
    pub fn add_text_pair(
        &mut self,
        row: usize,
        pair_id: Option<&str>,
        topic: &str,
        text_a: &str,
        text_b: &str,
        gold: G,
    ) -> Result<&Pair<G>> {
        let topic = topic.trim();
        let a = ArgumentSentence::new(topic, text_a.trim());
        let b = ArgumentSentence::new(topic, text_b.trim());
        self.add_pair(row, pair_id, a, b, gold)
    }

    /// Adds a pair of already constructed sentences. Both must share a
    /// nonempty topic and carry nonempty, distinct texts.
    pub fn add_pair(
        &mut self,
        row: usize,
        pair_id: Option<&str>,
        a: ArgumentSentence,
        b: ArgumentSentence,
        gold: G,
    ) -> Result<&Pair<G>> {
        let fail = |msg: String| Error::parse("<pairs>", row, msg);
        if a.topic_id.is_empty() {
            return Err(fail("empty topic id".into()));
        }
        if a.topic_id != b.topic_id {
            return Err(fail(format!(
                "pair sentences belong to different topics (`{}` vs `{}`)",
                a.topic_id, b.topic_id
            )));
        }
        if a.text.is_empty() || b.text.is_empty() {
            return Err(fail("empty sentence text".into()));
        }
        if a.id == b.id {
            return Err(fail("pair references the same sentence twice".into()));
        }
        let pair_id = match pair_id {
            Some(id) if !id.trim().is_empty() => id.trim().to_string(),
            Some(_) => return Err(fail("empty pair id".into())),
            None => format!("p{:05}", row),
        };
        if self.corpus.pair_index.contains_key(&pair_id) {
            return Err(Error::DuplicateId { kind: "pair", id: pair_id });
        }
        for s in [&a, &b] {
            if let Some(existing) = self.corpus.sentences.get(&s.id) {
                if existing.text != s.text || existing.topic_id != s.topic_id {
                    return Err(Error::Invariant(format!("sentence id collision on `{}`", s.id)));
                }
            }
        }
        let topic_id = a.topic_id.clone();
        self.corpus.topics.entry(topic_id.clone()).or_insert_with(|| Topic {
            id: topic_id.clone(),
            name: topic_id.clone(),
        });
        let pair = Pair {
            pair_id: pair_id.clone(),
            topic_id,
            a: a.id.clone(),
            b: b.id.clone(),
            gold,
        };
        for s in [a, b] {
            self.corpus.sentences.entry(s.id.clone()).or_insert(s);
        }
        self.corpus.pair_index.insert(pair_id, self.corpus.pairs.len());
        self.corpus.pairs.push(pair);
        Ok(self.corpus.pairs.last().expect("just pushed"))
    }

    pub fn build(self) -> PairCorpus<G> {
        self.corpus
    }
}
