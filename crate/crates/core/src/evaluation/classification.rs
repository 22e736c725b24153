use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use super::f1;
use crate::corpus::Stance;
use crate::error::{Error, Result};

const CLASSES: [Stance; 3] = [Stance::Pro, Stance::Con, Stance::None];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub predicted: usize,
}

/// Three-class stance classification scores for one topic and seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub topic: String,
    pub seed: u64,
    pub macro_f1: f64,
    pub p_arg_plus: f64,
    pub p_arg_minus: f64,
    pub r_arg_plus: f64,
    pub r_arg_minus: f64,
    pub per_class: BTreeMap<Stance, ClassScores>,
    /// Classes absent from both gold and predictions; their F1 counts as 0.
    pub absent_classes: Vec<Stance>,
}

pub fn classification_report(
    pred: &BTreeMap<String, Stance>,
    gold: &BTreeMap<String, Stance>,
    topic: &str,
    seed: u64,
) -> Result<ClassificationReport> {
    if pred.len() != gold.len() || pred.keys().zip(gold.keys()).any(|(a, b)| a != b) {
        return Err(Error::KeyMismatch(format!(
            "classification predictions and gold differ for topic `{topic}`, seed {seed}"
        )));
    }
    let mut confusion = [[0usize; 3]; 3];
    let index = |s: Stance| {
        CLASSES
            .iter()
            .position(|c| *c == s)
            .ok_or_else(|| Error::invalid(format!("label `{s}` outside {{pro, con, none}}")))
    };
    for (id, p) in pred {
        confusion[index(gold[id])?][index(*p)?] += 1;
    }
    let mut per_class = BTreeMap::new();
    let mut absent_classes = Vec::new();
    for (c, &class) in CLASSES.iter().enumerate() {
        let tp = confusion[c][c];
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = (0..3).map(|g| confusion[g][c]).sum();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        if support == 0 && predicted == 0 {
            absent_classes.push(class);
        }
        per_class.insert(
            class,
            ClassScores {
                precision: ratio(tp, predicted),
                recall: ratio(tp, support),
                f1: f1(tp, predicted - tp, support - tp),
                support,
                predicted,
            },
        );
    }
    let macro_f1 = per_class.values().map(|s| s.f1).sum::<f64>() / 3.0;
    Ok(ClassificationReport {
        topic: topic.to_string(),
        seed,
        macro_f1,
        p_arg_plus: per_class[&Stance::Pro].precision,
        p_arg_minus: per_class[&Stance::Con].precision,
        r_arg_plus: per_class[&Stance::Pro].recall,
        r_arg_minus: per_class[&Stance::Con].recall,
        per_class,
        absent_classes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationSummary {
    pub macro_f1: f64,
    pub p_arg_plus: f64,
    pub p_arg_minus: f64,
    pub r_arg_plus: f64,
    pub r_arg_minus: f64,
    pub n_topics: usize,
    pub n_seeds: usize,
}

/// Averages over topics within each seed, then over seeds.
pub fn aggregate_classification(reports: &[ClassificationReport]) -> Result<ClassificationSummary> {
    if reports.is_empty() {
        return Err(Error::InsufficientData("no classification reports to aggregate".into()));
    }
    let mut by_seed: BTreeMap<u64, Vec<&ClassificationReport>> = BTreeMap::new();
    for r in reports {
        by_seed.entry(r.seed).or_default().push(r);
    }
    let topics: BTreeSet<&str> = reports.iter().map(|r| r.topic.as_str()).collect();
    let metric = |f: fn(&ClassificationReport) -> f64| -> f64 {
        by_seed
            .values()
            .map(|rs| rs.iter().map(|r| f(r)).sum::<f64>() / rs.len() as f64)
            .sum::<f64>()
            / by_seed.len() as f64
    };
    Ok(ClassificationSummary {
        macro_f1: metric(|r| r.macro_f1),
        p_arg_plus: metric(|r| r.p_arg_plus),
        p_arg_minus: metric(|r| r.p_arg_minus),
        r_arg_plus: metric(|r| r.r_arg_plus),
        r_arg_minus: metric(|r| r.r_arg_minus),
        n_topics: topics.len(),
        n_seeds: by_seed.len(),
    })
}

/// Gold stance of one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StanceGold {
    pub topic: String,
    pub label: Stance,
}

fn tsv_rows<R: Read>(reader: R, source: &str, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::parse(source, 1, e.to_string()))?.clone();
    let found: Vec<&str> = header.iter().map(str::trim).collect();
    if found != columns {
        return Err(Error::parse(source, 1, format!("expected header {}", columns.join(" "))));
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| Error::parse(source, line, e.to_string()))?;
        if record.len() != columns.len() {
            return Err(Error::parse(source, line, format!("expected {} fields, found {}", columns.len(), record.len())));
        }
        rows.push((line, record.iter().map(|f| f.trim().to_string()).collect()));
    }
    Ok(rows)
}

fn stance(source: &str, line: usize, token: &str) -> Result<Stance> {
    match token.parse::<Stance>() {
        Ok(Stance::Unknown) | Err(_) => Err(Error::parse(source, line, format!("invalid stance `{token}`"))),
        Ok(s) => Ok(s),
    }
}

/// Reads `sentence_id  topic  label`.
pub fn read_stance_gold<R: Read>(reader: R, source: &str) -> Result<BTreeMap<String, StanceGold>> {
    let mut out = BTreeMap::new();
    for (line, f) in tsv_rows(reader, source, &["sentence_id", "topic", "label"])? {
        let label = stance(source, line, &f[2])?;
        if out.insert(f[0].clone(), StanceGold { topic: f[1].clone(), label }).is_some() {
            return Err(Error::parse(source, line, format!("duplicate sentence `{}`", f[0])));
        }
    }
    Ok(out)
}

/// Reads `sentence_id  label  seed`, grouped by seed.
pub fn read_stance_predictions<R: Read>(reader: R, source: &str) -> Result<BTreeMap<u64, BTreeMap<String, Stance>>> {
    let mut out: BTreeMap<u64, BTreeMap<String, Stance>> = BTreeMap::new();
    for (line, f) in tsv_rows(reader, source, &["sentence_id", "label", "seed"])? {
        let label = stance(source, line, &f[1])?;
        let seed: u64 = f[2].parse().map_err(|_| Error::parse(source, line, format!("invalid seed `{}`", f[2])))?;
        if out.entry(seed).or_default().insert(f[0].clone(), label).is_some() {
            return Err(Error::parse(source, line, format!("duplicate prediction for `{}` at seed {seed}", f[0])));
        }
    }
    Ok(out)
}

pub fn load_stance_gold(path: &Path) -> Result<BTreeMap<String, StanceGold>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_stance_gold(file, &path.display().to_string())
}

pub fn load_stance_predictions(path: &Path) -> Result<BTreeMap<u64, BTreeMap<String, Stance>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_stance_predictions(file, &path.display().to_string())
}

/// One report per (topic, seed): every gold sentence of the topic needs a
/// prediction at every seed.
pub fn evaluate_stance_predictions(
    gold: &BTreeMap<String, StanceGold>,
    predictions: &BTreeMap<u64, BTreeMap<String, Stance>>,
) -> Result<Vec<ClassificationReport>> {
    if predictions.is_empty() {
        return Err(Error::InsufficientData("no stance predictions".into()));
    }
    let mut by_topic: BTreeMap<&str, BTreeMap<String, Stance>> = BTreeMap::new();
    for (id, g) in gold {
        by_topic.entry(&g.topic).or_default().insert(id.clone(), g.label);
    }
    let mut reports = Vec::new();
    for (&seed, pred) in predictions {
        if let Some(extra) = pred.keys().find(|k| !gold.contains_key(*k)) {
            return Err(Error::KeyMismatch(format!("prediction for unknown sentence `{extra}` at seed {seed}")));
        }
        for (topic, topic_gold) in &by_topic {
            let topic_pred: BTreeMap<String, Stance> = topic_gold
                .keys()
                .filter_map(|k| pred.get(k).map(|l| (k.clone(), *l)))
                .collect();
            reports.push(classification_report(&topic_pred, topic_gold, topic, seed)?);
        }
    }
    Ok(reports)
}
