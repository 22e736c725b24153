//! Crowd annotation: MACE consolidation, inter-annotator agreement and the
//! split-half human performance estimate.

mod alpha;
mod human;
mod mace;

pub use alpha::{krippendorff_alpha, DistanceKind, DistanceSpec};
pub use human::{estimate_human_performance, HumanClusteringConfig, HumanMode, HumanPerformance, MaceScoreKind};
pub use mace::{mace_consolidate, MaceConfig, MaceResult};

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::corpus::GradedLabel;
use crate::error::{Error, Result};

/// One worker's vote on one pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotationRecord {
    pub pair_id: String,
    pub worker_id: String,
    pub label: GradedLabel,
}

impl AnnotationRecord {
    pub fn new(pair_id: &str, worker_id: &str, label: GradedLabel) -> Self {
        AnnotationRecord {
            pair_id: pair_id.to_string(),
            worker_id: worker_id.to_string(),
            label,
        }
    }
}

/// Rejects empty record sets and repeated `(pair_id, worker_id)` votes.
pub fn validate_records(records: &[AnnotationRecord]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no annotation records".into()));
    }
    let mut seen = BTreeSet::new();
    for r in records {
        if r.pair_id.is_empty() || r.worker_id.is_empty() {
            return Err(Error::invalid("annotation record with empty pair or worker id"));
        }
        if !seen.insert((r.pair_id.as_str(), r.worker_id.as_str())) {
            return Err(Error::DuplicateId {
                kind: "annotation",
                id: format!("{}/{}", r.pair_id, r.worker_id),
            });
        }
    }
    Ok(())
}

/// Reads the raw-annotation TSV: header `pair_id  worker_id  label`.
pub fn read_annotations<R: Read>(reader: R, source: &str, lax: bool) -> Result<Vec<AnnotationRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::parse(source, 1, e.to_string()))?.clone();
    let mut cols = [None; 3];
    for (i, name) in header.iter().enumerate() {
        let slot = match name.trim() {
            "pair_id" => 0,
            "worker_id" => 1,
            "label" => 2,
            _ if lax => continue,
            other => return Err(Error::parse(source, 1, format!("undeclared column `{other}`"))),
        };
        cols[slot] = Some(i);
    }
    let [Some(p), Some(w), Some(l)] = cols else {
        return Err(Error::parse(source, 1, "expected columns pair_id, worker_id, label"));
    };
    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::parse(source, i + 2, e.to_string()))?;
        let line = row.position().map_or(i + 2, |p| p.line() as usize);
        if row.len() != header.len() {
            return Err(Error::parse(source, line, format!("expected {} fields, found {}", header.len(), row.len())));
        }
        let label: GradedLabel = row[l]
            .parse()
            .map_err(|_| Error::parse(source, line, format!("unknown label token `{}`", &row[l])))?;
        let rec = AnnotationRecord::new(row[p].trim(), row[w].trim(), label);
        if rec.pair_id.is_empty() || rec.worker_id.is_empty() {
            return Err(Error::parse(source, line, "empty pair or worker id"));
        }
        if !seen.insert((rec.pair_id.clone(), rec.worker_id.clone())) {
            return Err(Error::parse(
                source,
                line,
                format!("duplicate vote of `{}` on `{}`", rec.worker_id, rec.pair_id),
            ));
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn load_annotations(path: &Path, lax: bool) -> Result<Vec<AnnotationRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(file, &path.display().to_string(), lax)
}

pub fn write_annotations<W: Write>(records: &[AnnotationRecord], mut out: W) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    writeln!(out, "pair_id\tworker_id\tlabel").map_err(io)?;
    for r in records {
        writeln!(out, "{}\t{}\t{}", r.pair_id, r.worker_id, r.label.token()).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Gold TSV: `pair_id  label  confidence` for every retained item.
pub fn write_gold<W: Write>(result: &MaceResult, mut out: W) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    writeln!(out, "pair_id\tlabel\tconfidence").map_err(io)?;
    for (id, label) in &result.gold {
        writeln!(out, "{id}\t{}\t{}", label.token(), result.confidence[id]).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Worker report TSV: `worker_id  competence`.
pub fn write_competence<W: Write>(result: &MaceResult, mut out: W) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    writeln!(out, "worker_id\tcompetence").map_err(io)?;
    for (id, c) in &result.competence {
        writeln!(out, "{id}\t{c}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Fraction of gold items carrying each label present.
pub fn label_distribution(gold: &BTreeMap<String, GradedLabel>) -> Result<BTreeMap<GradedLabel, f64>> {
    if gold.is_empty() {
        return Err(Error::InsufficientData("empty gold map".into()));
    }
    let mut counts: BTreeMap<GradedLabel, usize> = BTreeMap::new();
    for l in gold.values() {
        *counts.entry(*l).or_default() += 1;
    }
    let n = gold.len() as f64;
    Ok(counts.into_iter().map(|(l, c)| (l, c as f64 / n)).collect())
}
