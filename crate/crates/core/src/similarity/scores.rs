//! Precomputed pair score matrices.
//!
//! File format (UTF-8):
//!
//! ```text
//! SCORES[\t<provenance>]
//! <key>\t<score>
//! ```
//!
//! A key is either a corpus pair id or a sentence-pair key
//! `<sentence_id>|<sentence_id>`. Sentence-pair keys are canonicalised to
//! sorted order on load, so lookups are symmetric.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::corpus::PairCorpus;
use crate::error::{Error, Result};

/// Canonical key of an unordered sentence pair.
pub fn sentence_pair_key(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}|{b}")
    } else {
        format!("{b}|{a}")
    }
}

fn canonical_key(key: &str) -> String {
    match key.split_once('|') {
        Some((a, b)) if !b.contains('|') => sentence_pair_key(a, b),
        _ => key.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    scores: BTreeMap<String, f64>,
    provenance: String,
    missing: Option<f64>,
}

impl ScoreMatrix {
    pub fn new(provenance: impl Into<String>) -> Self {
        ScoreMatrix {
            scores: BTreeMap::new(),
            provenance: provenance.into(),
            missing: None,
        }
    }

    pub fn insert(&mut self, key: &str, score: f64) -> Result<()> {
        if key.is_empty() || key.contains(['\t', '\n', '\r']) {
            return Err(Error::invalid(format!("invalid score key {key:?}")));
        }
        if !score.is_finite() {
            return Err(Error::invalid(format!("non-finite score for `{key}`")));
        }
        let key = canonical_key(key);
        if self.scores.contains_key(&key) {
            return Err(Error::DuplicateId { kind: "score", id: key });
        }
        self.scores.insert(key, score);
        Ok(())
    }

    /// Score returned for sentence pairs without an entry; by default such
    /// lookups are errors.
    pub fn with_missing_score(mut self, score: Option<f64>) -> Self {
        self.missing = score;
        self
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.scores.get(&canonical_key(key)).copied().ok_or_else(|| Error::Missing {
            kind: "score",
            id: key.to_string(),
        })
    }

    pub fn sentence_similarity(&self, a: &str, b: &str) -> Result<f64> {
        let key = sentence_pair_key(a, b);
        match (self.scores.get(&key), self.missing) {
            (Some(s), _) => Ok(*s),
            (None, Some(s)) => Ok(s),
            (None, None) => Err(Error::Missing { kind: "score", id: key }),
        }
    }

    /// Re-keys entries named by corpus pair ids to sentence-pair keys so the
    /// matrix can answer sentence-level queries. Other keys are kept.
    pub fn bind<G>(&self, corpus: &PairCorpus<G>) -> Result<Self> {
        let mut bound = ScoreMatrix::new(self.provenance.clone()).with_missing_score(self.missing);
        for (key, &score) in &self.scores {
            let target = match corpus.pair(key) {
                Some(p) => sentence_pair_key(&p.a, &p.b),
                None => key.clone(),
            };
            match bound.scores.get(&target) {
                Some(&prev) if prev != score => {
                    return Err(Error::DuplicateId { kind: "score", id: target });
                }
                _ => {
                    bound.scores.insert(target, score);
                }
            }
        }
        Ok(bound)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file, &path.display().to_string())
    }

    pub fn read<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::parse(source, 1, "empty score file")),
        };
        let (head, provenance) = header.split_once('\t').unwrap_or((&header, ""));
        if head != "SCORES" {
            return Err(Error::parse(source, 1, format!("expected `SCORES` header, found {head:?}")));
        }
        let mut matrix = ScoreMatrix::new(provenance);
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io(source, e))?;
            let (key, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(source, line_no, "expected `<pair_id>\\t<score>`"))?;
            let score: f64 = value
                .parse()
                .map_err(|_| Error::parse(source, line_no, format!("invalid score {value:?}")))?;
            matrix
                .insert(key, score)
                .map_err(|e| Error::parse(source, line_no, e.to_string()))?;
        }
        Ok(matrix)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<output>", e);
        if self.provenance.is_empty() {
            writeln!(out, "SCORES").map_err(io)?;
        } else {
            writeln!(out, "SCORES\t{}", self.provenance).map_err(io)?;
        }
        for (k, v) in &self.scores {
            writeln!(out, "{k}\t{v}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

/// Stored score of `pair_id`, unchanged.
pub fn lookup_score(matrix: &ScoreMatrix, pair_id: &str) -> Result<f64> {
    matrix.get(pair_id)
}
