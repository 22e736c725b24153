//! Pair corpus file formats.
//!
//! The canonical format is a tab-separated file with a header row:
//!
//! ```text
//! pair_id  topic  sentence_a  sentence_b  label
//! ```
//!
//! where `label` is one of `NS`, `SS`, `HS`, `DTORCD` (empty for unlabeled
//! pairs). Graded-score corpora use a `score` column holding a real in
//! `[0, 5]` instead. The released ASPECT header (`topic sentence_1
//! sentence_2 label`, no pair ids) is accepted as well; pair ids are then
//! derived from the row number. The AFS adapter reads comma-separated files
//! whose score column may be called `score` or `regression_label`; when the
//! file has no `topic` column the file stem is used.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::corpus::{AfsCorpus, AspectCorpus, CorpusBuilder, GradedLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// Tab-separated, canonical or released ASPECT layout.
    AspectTsv,
    /// Comma-separated AFS layout.
    AfsCsv,
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aspect_tsv" | "aspect-tsv" | "tsv" => Ok(CorpusFormat::AspectTsv),
            "afs_csv" | "afs-csv" | "csv" => Ok(CorpusFormat::AfsCsv),
            other => Err(Error::invalid(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Ignore undeclared columns instead of rejecting the file.
    pub lax: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedCorpus {
    Aspect(AspectCorpus),
    Afs(AfsCorpus),
}

impl LoadedCorpus {
    pub fn into_aspect(self) -> Result<AspectCorpus> {
        match self {
            LoadedCorpus::Aspect(c) => Ok(c),
            LoadedCorpus::Afs(_) => Err(Error::invalid("expected a graded-label corpus, found graded scores")),
        }
    }

    pub fn into_afs(self) -> Result<AfsCorpus> {
        match self {
            LoadedCorpus::Afs(c) => Ok(c),
            LoadedCorpus::Aspect(_) => Err(Error::invalid("expected a graded-score corpus, found graded labels")),
        }
    }
}

pub fn load_pair_corpus(path: &Path, format: CorpusFormat, options: LoadOptions) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("topic");
    read_pair_corpus(file, &path.display().to_string(), format, options, stem)
}

#[derive(Default)]
struct Columns {
    pair_id: Option<usize>,
    topic: Option<usize>,
    sentence_a: Option<usize>,
    sentence_b: Option<usize>,
    label: Option<usize>,
    score: Option<usize>,
}

impl Columns {
    fn from_header(header: &csv::StringRecord, source: &str, format: CorpusFormat, lax: bool) -> Result<Self> {
        let mut cols = Columns::default();
        for (i, name) in header.iter().enumerate() {
            let name = name.trim();
            let slot = match name {
                "pair_id" | "id" => &mut cols.pair_id,
                "topic" => &mut cols.topic,
                "sentence_a" | "sentence_1" | "sentence1" => &mut cols.sentence_a,
                "sentence_b" | "sentence_2" | "sentence2" => &mut cols.sentence_b,
                "label" if format == CorpusFormat::AspectTsv => &mut cols.label,
                "score" | "regression_label" => &mut cols.score,
                _ if lax => continue,
                other => return Err(Error::parse(source, 1, format!("undeclared column `{other}`"))),
            };
            if slot.replace(i).is_some() {
                return Err(Error::parse(source, 1, format!("duplicate column `{name}`")));
            }
        }
        let missing = |what: &str| Error::parse(source, 1, format!("missing `{what}` column"));
        cols.sentence_a.ok_or_else(|| missing("sentence_a"))?;
        cols.sentence_b.ok_or_else(|| missing("sentence_b"))?;
        if format == CorpusFormat::AspectTsv && cols.topic.is_none() {
            return Err(missing("topic"));
        }
        match (cols.label, cols.score) {
            (Some(_), Some(_)) => Err(Error::parse(source, 1, "both `label` and `score` columns present")),
            (None, None) => Err(missing(if format == CorpusFormat::AfsCsv { "score" } else { "label" })),
            _ => Ok(cols),
        }
    }
}

/// Parses a pair corpus from any reader. `source` names the input in error
/// messages; `default_topic` is used by the AFS adapter when the file has no
/// topic column.
pub fn read_pair_corpus<R: Read>(
    reader: R,
    source: &str,
    format: CorpusFormat,
    options: LoadOptions,
    default_topic: &str,
) -> Result<LoadedCorpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(match format {
            CorpusFormat::AspectTsv => b'\t',
            CorpusFormat::AfsCsv => b',',
        })
        .quoting(format == CorpusFormat::AfsCsv)
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    let cols = Columns::from_header(&header, source, format, options.lax)?;

    let mut aspect: CorpusBuilder<Option<GradedLabel>> = CorpusBuilder::new();
    let mut afs: CorpusBuilder<f64> = CorpusBuilder::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(source, i + 2, e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 2);
        if record.len() != header.len() {
            return Err(Error::parse(
                source,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let field = |c: Option<usize>| c.map(|c| &record[c]);
        let pair_id = field(cols.pair_id);
        let topic = field(cols.topic).unwrap_or(default_topic);
        let a = field(cols.sentence_a).unwrap_or_default();
        let b = field(cols.sentence_b).unwrap_or_default();
        let relocate = |e: Error| match e {
            Error::Parse { line: _, message, .. } => Error::parse(source, line, message),
            other => other,
        };
        if let Some(raw) = field(cols.label) {
            let label = match raw.trim() {
                "" => None,
                tok => Some(tok.parse::<GradedLabel>().map_err(|_| {
                    Error::parse(source, line, format!("unknown label token `{tok}`"))
                })?),
            };
            aspect.add_text_pair(line, pair_id, topic, a, b, label).map_err(relocate)?;
        } else {
            let raw = field(cols.score).unwrap_or_default().trim();
            let score: f64 = raw
                .parse()
                .map_err(|_| Error::parse(source, line, format!("invalid score `{raw}`")))?;
            if !(0.0..=5.0).contains(&score) {
                return Err(Error::parse(source, line, format!("score {score} outside [0, 5]")));
            }
            afs.add_text_pair(line, pair_id, topic, a, b, score).map_err(relocate)?;
        }
    }
    Ok(if cols.label.is_some() {
        LoadedCorpus::Aspect(aspect.build())
    } else {
        LoadedCorpus::Afs(afs.build())
    })
}

fn tsv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(w)
}

fn check_field(field: &str) -> Result<&str> {
    if field.contains(['\t', '\n', '\r']) {
        Err(Error::invalid(format!("field contains a tab or newline: {field:?}")))
    } else {
        Ok(field)
    }
}

fn write_rows<W: Write, G>(
    corpus: &crate::corpus::PairCorpus<G>,
    out: W,
    last_column: &str,
    render: impl Fn(&G) -> String,
) -> Result<()> {
    let mut w = tsv_writer(out);
    let csv_err = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(["pair_id", "topic", "sentence_a", "sentence_b", last_column])
        .map_err(csv_err)?;
    for p in corpus.pairs() {
        let a = &corpus.sentences()[&p.a].text;
        let b = &corpus.sentences()[&p.b].text;
        let gold = render(&p.gold);
        w.write_record([
            check_field(&p.pair_id)?,
            check_field(&p.topic_id)?,
            check_field(a)?,
            check_field(b)?,
            gold.as_str(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

/// Writes the canonical graded-label TSV.
pub fn write_aspect_corpus<W: Write>(corpus: &AspectCorpus, out: W) -> Result<()> {
    write_rows(corpus, out, "label", |g| g.map(|l| l.token().to_string()).unwrap_or_default())
}

/// Writes the canonical graded-score TSV.
pub fn write_afs_corpus<W: Write>(corpus: &AfsCorpus, out: W) -> Result<()> {
    write_rows(corpus, out, "score", |g| g.to_string())
}
