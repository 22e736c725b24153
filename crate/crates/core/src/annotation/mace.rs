//! Multi-Annotator Competence Estimation.
//!
//! Generative model: each item has a latent true label drawn uniformly. Each
//! worker `j` knows the answer with probability `theta_j` (its competence)
//! and then reports the true label; otherwise it spams, drawing a label from
//! its own distribution `xi_j`. Parameters are fitted by EM with additive
//! smoothing `s`, i.e. MAP estimation under Beta(1+s, 1+s) and
//! Dirichlet(1+s) priors; the tracked objective is the log posterior, which
//! EM never decreases. Several random restarts are run and the one with the
//! highest final objective wins.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{validate_records, AnnotationRecord};
use crate::corpus::GradedLabel;
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaceConfig {
    /// Fraction of items retained, most confident (lowest entropy) first.
    pub threshold: f64,
    pub em_iterations: usize,
    pub restarts: usize,
    pub smoothing: f64,
    pub seed: u64,
}

impl Default for MaceConfig {
    fn default() -> Self {
        MaceConfig {
            threshold: 1.0,
            em_iterations: 50,
            restarts: 10,
            smoothing: 0.1,
            seed: 0,
        }
    }
}

impl MaceConfig {
    fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::invalid(format!("MACE threshold {} outside (0, 1]", self.threshold)));
        }
        if !(self.smoothing > 0.0 && self.smoothing.is_finite()) {
            return Err(Error::invalid("MACE smoothing must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("MACE needs at least one restart"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaceResult {
    /// Argmax posterior label of every retained item.
    pub gold: BTreeMap<String, GradedLabel>,
    /// Posterior probability of the argmax label, for every item.
    pub confidence: BTreeMap<String, f64>,
    /// Full label posterior per item, indexed by [`GradedLabel::index`].
    pub posterior: BTreeMap<String, [f64; 4]>,
    pub competence: BTreeMap<String, f64>,
    pub retained_fraction: f64,
    /// Final log posterior of the winning restart.
    pub log_objective: f64,
    pub best_restart: usize,
    /// Objective after every EM iteration, per restart.
    pub restart_traces: Vec<Vec<f64>>,
}

impl MaceResult {
    /// Posterior probability that the item's label binarizes to similar.
    pub fn similar_probability(&self, pair_id: &str) -> Option<f64> {
        self.posterior.get(pair_id).map(|p| {
            p[GradedLabel::SomeSimilarity.index()] + p[GradedLabel::HighSimilarity.index()]
        })
    }
}

/// Votes as index pairs `(worker, label)` per item.
pub(crate) struct Votes {
    pub items: Vec<Vec<(usize, usize)>>,
    pub n_workers: usize,
    pub n_labels: usize,
}

#[derive(Clone)]
struct Params {
    theta: Vec<f64>,
    spam: Vec<Vec<f64>>,
}

pub(crate) struct Fit {
    theta: Vec<f64>,
    posterior: Vec<Vec<f64>>,
    trace: Vec<f64>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn e_step(votes: &Votes, p: &Params) -> (Vec<Vec<f64>>, f64) {
    let k = votes.n_labels;
    let prior = -(k as f64).ln();
    let mut loglik = 0.0;
    let posterior = votes
        .items
        .iter()
        .map(|item| {
            let mut lp = vec![prior; k];
            for &(j, a) in item {
                let spam = (1.0 - p.theta[j]) * p.spam[j][a];
                for (t, v) in lp.iter_mut().enumerate() {
                    *v += if t == a { p.theta[j] + spam } else { spam }.ln();
                }
            }
            let z = log_sum_exp(&lp);
            loglik += z;
            lp.iter().map(|v| (v - z).exp()).collect()
        })
        .collect();
    (posterior, loglik)
}

fn log_prior(p: &Params, s: f64) -> f64 {
    p.theta
        .iter()
        .zip(&p.spam)
        .map(|(t, xi)| s * (t.ln() + (1.0 - t).ln()) + s * xi.iter().map(|x| x.ln()).sum::<f64>())
        .sum()
}

fn m_step(votes: &Votes, p: &Params, posterior: &[Vec<f64>], s: f64) -> Params {
    let (w, k) = (votes.n_workers, votes.n_labels);
    let mut know = vec![0.0; w];
    let mut total = vec![0.0; w];
    let mut spam_counts = vec![vec![0.0; k]; w];
    for (item, q) in votes.items.iter().zip(posterior) {
        for &(j, a) in item {
            let on_target = p.theta[j] + (1.0 - p.theta[j]) * p.spam[j][a];
            let knew = q[a] * p.theta[j] / on_target;
            know[j] += knew;
            total[j] += 1.0;
            spam_counts[j][a] += 1.0 - knew;
        }
    }
    let theta = (0..w).map(|j| (know[j] + s) / (total[j] + 2.0 * s)).collect();
    let spam = spam_counts
        .into_iter()
        .map(|c| {
            let z: f64 = c.iter().sum::<f64>() + k as f64 * s;
            c.into_iter().map(|x| (x + s) / z).collect()
        })
        .collect();
    Params { theta, spam }
}

pub(crate) fn fit(votes: &Votes, iterations: usize, smoothing: f64, rng: &mut StreamRng) -> Fit {
    let mut params = Params {
        theta: (0..votes.n_workers).map(|_| rng.gen_range(0.2..0.8)).collect(),
        spam: (0..votes.n_workers)
            .map(|_| {
                let raw: Vec<f64> = (0..votes.n_labels).map(|_| rng.gen_range(0.1..1.0)).collect();
                let z: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / z).collect()
            })
            .collect(),
    };
    let mut trace = Vec::with_capacity(iterations + 1);
    for _ in 0..iterations {
        let (posterior, loglik) = e_step(votes, &params);
        trace.push(loglik + log_prior(&params, smoothing));
        params = m_step(votes, &params, &posterior, smoothing);
    }
    let (posterior, loglik) = e_step(votes, &params);
    trace.push(loglik + log_prior(&params, smoothing));
    Fit {
        theta: params.theta,
        posterior,
        trace,
    }
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

pub fn mace_consolidate(records: &[AnnotationRecord], config: &MaceConfig) -> Result<MaceResult> {
    config.validate()?;
    validate_records(records)?;

    let mut item_index: BTreeMap<&str, usize> = BTreeMap::new();
    let mut worker_index: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        let n = item_index.len();
        item_index.entry(&r.pair_id).or_insert(n);
        let n = worker_index.len();
        worker_index.entry(&r.worker_id).or_insert(n);
    }
    // Index items and workers in sorted id order.
    for (i, v) in item_index.values_mut().enumerate() {
        *v = i;
    }
    for (i, v) in worker_index.values_mut().enumerate() {
        *v = i;
    }
    let mut votes = Votes {
        items: vec![Vec::new(); item_index.len()],
        n_workers: worker_index.len(),
        n_labels: GradedLabel::ALL.len(),
    };
    for r in records {
        votes.items[item_index[r.pair_id.as_str()]].push((worker_index[r.worker_id.as_str()], r.label.index()));
    }
    for item in &mut votes.items {
        item.sort_unstable();
    }

    let fits: Vec<Fit> = (0..config.restarts)
        .into_par_iter()
        .map(|r| fit(&votes, config.em_iterations, config.smoothing, &mut rng::stream(config.seed, r as u64)))
        .collect();
    let best_restart = (0..fits.len())
        .reduce(|best, r| {
            if fits[r].trace.last() > fits[best].trace.last() {
                r
            } else {
                best
            }
        })
        .expect("at least one restart");
    let best = &fits[best_restart];

    let item_ids: Vec<&str> = item_index.keys().copied().collect();
    let mut posterior = BTreeMap::new();
    let mut confidence = BTreeMap::new();
    let mut argmax = Vec::with_capacity(item_ids.len());
    for (i, id) in item_ids.iter().enumerate() {
        let q = &best.posterior[i];
        let mut counts = [0usize; 4];
        for &(_, a) in &votes.items[i] {
            counts[a] += 1;
        }
        let label = (0..4)
            .max_by(|&a, &b| {
                q[a].total_cmp(&q[b])
                    .then(counts[a].cmp(&counts[b]))
                    .then(b.cmp(&a))
            })
            .expect("four labels");
        argmax.push(label);
        confidence.insert(id.to_string(), q[label]);
        posterior.insert(id.to_string(), [q[0], q[1], q[2], q[3]]);
    }

    let n = item_ids.len();
    let keep = ((config.threshold * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let mut ranked: Vec<(f64, usize)> = (0..n).map(|i| (entropy(&best.posterior[i]), i)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let gold = ranked[..keep]
        .iter()
        .map(|&(_, i)| (item_ids[i].to_string(), GradedLabel::from_index(argmax[i]).expect("label index")))
        .collect();

    let competence = worker_index
        .iter()
        .map(|(id, &j)| (id.to_string(), best.theta[j]))
        .collect();

    Ok(MaceResult {
        gold,
        confidence,
        posterior,
        competence,
        retained_fraction: keep as f64 / n as f64,
        log_objective: *best.trace.last().expect("nonempty trace"),
        best_restart,
        restart_traces: fits.into_iter().map(|f| f.trace).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use GradedLabel::*;

    fn rec(p: &str, w: &str, l: GradedLabel) -> AnnotationRecord {
        AnnotationRecord::new(p, w, l)
    }

    fn fixture() -> Vec<AnnotationRecord> {
        let mut out = Vec::new();
        let plan: [(&str, [GradedLabel; 7]); 4] = [
            ("unanimous", [HighSimilarity; 7]),
            ("mixed", [HighSimilarity, SomeSimilarity, HighSimilarity, NoSimilarity, SomeSimilarity, HighSimilarity, DifferentTopic]),
            ("split", [NoSimilarity, NoSimilarity, NoSimilarity, SomeSimilarity, SomeSimilarity, SomeSimilarity, HighSimilarity]),
            ("mostly_no", [NoSimilarity, NoSimilarity, NoSimilarity, NoSimilarity, NoSimilarity, DifferentTopic, NoSimilarity]),
        ];
        for (p, votes) in plan {
            for (w, l) in votes.iter().enumerate() {
                out.push(rec(p, &format!("w{w}"), *l));
            }
        }
        out
    }

    #[test]
    fn unanimity_and_confidence() {
        let r = mace_consolidate(&fixture(), &MaceConfig::default()).unwrap();
        assert_eq!(r.gold["unanimous"], HighSimilarity);
        assert_eq!(r.gold["mostly_no"], NoSimilarity);
        for (id, c) in &r.confidence {
            assert!((0.0..=1.0).contains(c));
            assert!(r.confidence["unanimous"] >= *c - 1e-12, "{id}");
        }
        assert!(r.competence.values().all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn full_threshold_keeps_everything() {
        let r = mace_consolidate(&fixture(), &MaceConfig::default()).unwrap();
        assert_eq!(r.retained_fraction, 1.0);
        assert_eq!(r.gold.len(), 4);
    }

    #[test]
    fn partial_threshold_drops_least_certain() {
        let cfg = MaceConfig {
            threshold: 0.5,
            ..MaceConfig::default()
        };
        let r = mace_consolidate(&fixture(), &cfg).unwrap();
        assert_eq!(r.gold.len(), 2);
        assert_eq!(r.retained_fraction, 0.5);
        assert!(r.gold.contains_key("unanimous"));
        assert_eq!(r.confidence.len(), 4);
    }

    #[test]
    fn objective_never_decreases() {
        let r = mace_consolidate(&fixture(), &MaceConfig::default()).unwrap();
        for trace in &r.restart_traces {
            assert_eq!(trace.len(), 51);
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
            }
        }
        let best = r.restart_traces.iter().map(|t| *t.last().unwrap()).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.log_objective, best);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = mace_consolidate(&fixture(), &MaceConfig::default()).unwrap();
        let b = mace_consolidate(&fixture(), &MaceConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_inputs() {
        assert!(mace_consolidate(&[], &MaceConfig::default()).is_err());
        for threshold in [0.0, 1.5] {
            let cfg = MaceConfig { threshold, ..MaceConfig::default() };
            assert!(mace_consolidate(&fixture(), &cfg).is_err());
        }
        let cfg = MaceConfig { smoothing: 0.0, ..MaceConfig::default() };
        assert!(mace_consolidate(&fixture(), &cfg).is_err());
        let dup = vec![rec("p", "w", NoSimilarity), rec("p", "w", HighSimilarity)];
        assert!(mace_consolidate(&dup, &MaceConfig::default()).is_err());
    }
}
