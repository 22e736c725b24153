//! Average-linkage agglomerative clustering with a stopping threshold.
//!
//! The linkage between clusters `A` and `B` is the mean pairwise similarity
//! `sum_{a in A, b in B} d(a, b) / (|A| |B|)`. Starting from singletons, the
//! pair with the highest linkage is merged while that linkage is at least the
//! stopping threshold. Ties go to the pair whose `(min id, max id)` of the
//! two clusters' smallest members is lexicographically smallest.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{ArgumentSentence, AspectCorpus, BinaryLabel, Pair};
use crate::error::{Error, Result};
use crate::evaluation::binary_f_scores;
use crate::similarity::{SimilarityMatrix, SimilaritySource};

/// One agglomeration step. Clusters are named by their smallest member id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub left: String,
    pub right: String,
    pub linkage: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Cluster id per sentence; ids are contiguous from 0 and numbered in
    /// order of each cluster's smallest member.
    pub assignment: BTreeMap<String, usize>,
    pub threshold_used: f64,
    pub merge_trace: Vec<Merge>,
}

impl Clustering {
    pub fn n_clusters(&self) -> usize {
        self.assignment.values().max().map_or(0, |m| m + 1)
    }

    pub fn cluster_of(&self, id: &str) -> Result<usize> {
        self.assignment.get(id).copied().ok_or_else(|| Error::Missing {
            kind: "clustered sentence",
            id: id.to_string(),
        })
    }

    /// Members of each cluster, indexed by cluster id.
    pub fn clusters(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.n_clusters()];
        for (id, &c) in &self.assignment {
            out[c].push(id.as_str());
        }
        out
    }
}

/// The complete agglomeration sequence over a similarity matrix. Cutting it
/// at a threshold keeps the longest prefix of merges whose linkage is at
/// least the threshold, which is exactly where the greedy loop would stop.
#[derive(Debug, Clone)]
pub struct LinkageTree {
    ids: Vec<String>,
    /// (representative index, representative index, linkage, merged size)
    steps: Vec<(usize, usize, f64, usize)>,
}

impl LinkageTree {
    pub fn build(matrix: &SimilarityMatrix) -> Self {
        // Sort members by id so index order is id order.
        let mut order: Vec<usize> = (0..matrix.len()).collect();
        order.sort_by(|&a, &b| matrix.ids()[a].cmp(&matrix.ids()[b]));
        let ids: Vec<String> = order.iter().map(|&i| matrix.ids()[i].clone()).collect();
        let n = ids.len();

        // sums[i * n + j]: total cross similarity between active clusters i, j.
        let mut sums = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sums[i * n + j] = matrix.get(order[i], order[j]);
                }
            }
        }
        let mut size = vec![1usize; n];
        // Slot i always holds the cluster whose smallest member is i.
        let mut active: Vec<usize> = (0..n).collect();
        let mut steps = Vec::with_capacity(n.saturating_sub(1));

        while active.len() > 1 {
            let mut best: Option<(f64, usize, usize)> = None;
            for (x, &i) in active.iter().enumerate() {
                for &j in &active[x + 1..] {
                    let linkage = sums[i * n + j] / (size[i] * size[j]) as f64;
                    // active is ascending, so (i, j) pairs are visited in
                    // lexicographic order and only a strictly larger value wins.
                    if best.is_none_or(|(b, _, _)| linkage > b) {
                        best = Some((linkage, i, j));
                    }
                }
            }
            let (linkage, i, j) = best.expect("at least two active clusters");
            for &k in &active {
                if k != i && k != j {
                    let s = sums[i * n + k] + sums[j * n + k];
                    sums[i * n + k] = s;
                    sums[k * n + i] = s;
                }
            }
            size[i] += size[j];
            active.retain(|&k| k != j);
            steps.push((i, j, linkage, size[i]));
        }
        LinkageTree { ids, steps }
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn linkages(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.2)
    }

    /// Number of merges performed when stopping at `threshold`.
    pub fn merges_at(&self, threshold: f64) -> usize {
        self.steps.iter().take_while(|s| s.2 >= threshold).count()
    }

    pub fn cut(&self, threshold: f64) -> Clustering {
        let k = self.merges_at(threshold);
        let n = self.ids.len();
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut x: usize) -> usize {
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        for &(i, j, _, _) in &self.steps[..k] {
            let (ri, rj) = (find(&mut root, i), find(&mut root, j));
            root[ri.max(rj)] = ri.min(rj);
        }
        let mut number: BTreeMap<usize, usize> = BTreeMap::new();
        let mut assignment = BTreeMap::new();
        for x in 0..n {
            let r = find(&mut root, x);
            let next = number.len();
            let c = *number.entry(r).or_insert(next);
            assignment.insert(self.ids[x].clone(), c);
        }
        Clustering {
            assignment,
            threshold_used: threshold,
            merge_trace: self.steps[..k]
                .iter()
                .map(|&(i, j, linkage, size)| Merge {
                    left: self.ids[i].clone(),
                    right: self.ids[j].clone(),
                    linkage,
                    size,
                })
                .collect(),
        }
    }
}

/// Clusters a precomputed similarity matrix.
pub fn cluster_matrix(matrix: &SimilarityMatrix, stop_threshold: f64) -> Clustering {
    LinkageTree::build(matrix).cut(stop_threshold)
}

pub fn agglomerative_cluster(
    sentences: &[&ArgumentSentence],
    source: &SimilaritySource,
    stop_threshold: f64,
) -> Result<Clustering> {
    if sentences.is_empty() {
        return Err(Error::invalid("cannot cluster an empty sentence set"));
    }
    Ok(cluster_matrix(&source.matrix(sentences)?, stop_threshold))
}

/// Same cluster ⇒ similar, different clusters ⇒ dissimilar.
pub fn pair_labels_from_clustering<'a, G: 'a>(
    clustering: &Clustering,
    pairs: impl IntoIterator<Item = &'a Pair<G>>,
) -> Result<BTreeMap<String, BinaryLabel>> {
    pairs
        .into_iter()
        .map(|p| {
            let same = clustering.cluster_of(&p.a)? == clustering.cluster_of(&p.b)?;
            let label = if same { BinaryLabel::Similar } else { BinaryLabel::Dissimilar };
            Ok((p.pair_id.clone(), label))
        })
        .collect()
}

/// How a clustering threshold is fitted across tuning topics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdScope {
    /// One threshold maximising F_mean over the pooled pairs of all topics.
    #[default]
    Global,
    /// Per-topic optima, averaged.
    PerTopicMean,
}

impl std::str::FromStr for ThresholdScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(ThresholdScope::Global),
            "per-topic-mean" | "per_topic_mean" => Ok(ThresholdScope::PerTopicMean),
            other => Err(Error::invalid(format!("unknown threshold scope `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TunedThreshold {
    pub threshold: f64,
    pub objective: f64,
}

/// Sorted, deduplicated, finite grid.
pub(crate) fn normalize_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(Error::invalid("threshold grid is empty"));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite grid value {x}")));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

/// Per-topic linkage trees and binary gold for the labeled pairs of a set of
/// topics; reused across every grid value.
pub struct TopicTrees<'c> {
    topics: Vec<(LinkageTree, Vec<&'c Pair<Option<crate::corpus::GradedLabel>>>)>,
    gold: BTreeMap<String, BinaryLabel>,
}

impl<'c> TopicTrees<'c> {
    pub fn build(corpus: &'c AspectCorpus, topics: &BTreeSet<String>, source: &SimilaritySource) -> Result<Self> {
        let mut out = Vec::new();
        let mut gold = BTreeMap::new();
        for topic in topics {
            let labeled: Vec<_> = corpus.pairs().iter().filter(|p| &p.topic_id == topic && p.gold.is_some()).collect();
            if labeled.is_empty() {
                continue;
            }
            for p in &labeled {
                gold.insert(p.pair_id.clone(), crate::corpus::binarize(p.gold.expect("filtered")));
            }
            let matrix = source.matrix(&corpus.topic_sentences(topic))?;
            out.push((LinkageTree::build(&matrix), labeled));
        }
        Ok(TopicTrees { topics: out, gold })
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    /// Binary gold of every labeled pair covered by the trees.
    pub fn gold(&self) -> &BTreeMap<String, BinaryLabel> {
        &self.gold
    }

    /// Cluster-induced labels of every labeled pair at `threshold`.
    pub fn predict(&self, threshold: f64) -> Result<BTreeMap<String, BinaryLabel>> {
        self.labels(0..self.topics.len(), threshold)
    }

    fn labels(&self, range: std::ops::Range<usize>, threshold: f64) -> Result<BTreeMap<String, BinaryLabel>> {
        let mut pred = BTreeMap::new();
        for (tree, pairs) in &self.topics[range] {
            pred.extend(pair_labels_from_clustering(&tree.cut(threshold), pairs.iter().copied())?);
        }
        Ok(pred)
    }

    fn objective(&self, range: std::ops::Range<usize>, threshold: f64) -> Result<f64> {
        let pred = self.labels(range, threshold)?;
        let gold: BTreeMap<String, BinaryLabel> = pred.keys().map(|k| (k.clone(), self.gold[k])).collect();
        Ok(binary_f_scores(&pred, &gold)?.f_mean)
    }

    fn best(&self, range: std::ops::Range<usize>, grid: &[f64]) -> Result<TunedThreshold> {
        let mut best: Option<TunedThreshold> = None;
        for &t in grid {
            let objective = self.objective(range.clone(), t)?;
            if best.is_none_or(|b| objective > b.objective) {
                best = Some(TunedThreshold { threshold: t, objective });
            }
        }
        Ok(best.expect("grid is nonempty"))
    }

    /// Grid value maximising F_mean; ties go to the smaller threshold.
    pub fn tune(&self, grid: &[f64], scope: ThresholdScope) -> Result<TunedThreshold> {
        let grid = normalize_grid(grid)?;
        if self.topics.is_empty() {
            return Err(Error::InsufficientData("no labeled tuning pairs".into()));
        }
        match scope {
            ThresholdScope::Global => self.best(0..self.topics.len(), &grid),
            ThresholdScope::PerTopicMean => {
                let per: Vec<TunedThreshold> = (0..self.topics.len())
                    .map(|i| self.best(i..i + 1, &grid))
                    .collect::<Result<_>>()?;
                let threshold = per.iter().map(|t| t.threshold).sum::<f64>() / per.len() as f64;
                let objective = self.objective(0..self.topics.len(), threshold)?;
                Ok(TunedThreshold { threshold, objective })
            }
        }
    }
}

/// Tunes the stopping threshold on the labeled pairs of `topics`.
pub fn tune_threshold(
    corpus: &AspectCorpus,
    topics: &BTreeSet<String>,
    source: &SimilaritySource,
    grid: &[f64],
    scope: ThresholdScope,
) -> Result<TunedThreshold> {
    normalize_grid(grid)?;
    TopicTrees::build(corpus, topics, source)?.tune(grid, scope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(ids: &[&str], sims: &[(&str, &str, f64)]) -> SimilarityMatrix {
        let ids: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let lookup: BTreeMap<(String, String), f64> = sims
            .iter()
            .flat_map(|&(a, b, s)| [((a.into(), b.into()), s), ((b.into(), a.into()), s)])
            .collect();
        let cloned = ids.clone();
        SimilarityMatrix::from_fn(ids, |i, j| lookup[&(cloned[i].clone(), cloned[j].clone())]).unwrap()
    }

    fn four() -> SimilarityMatrix {
        matrix(
            &["a", "b", "c", "d"],
            &[
                ("a", "b", 0.9),
                ("c", "d", 0.8),
                ("a", "c", 0.2),
                ("a", "d", 0.1),
                ("b", "c", 0.2),
                ("b", "d", 0.1),
            ],
        )
    }

    #[test]
    fn four_item_example() {
        let c = cluster_matrix(&four(), 0.5);
        assert_eq!(c.clusters(), vec![vec!["a", "b"], vec!["c", "d"]]);
        assert_eq!(c.merge_trace.len(), 2);
        assert_eq!(c.merge_trace[0].linkage, 0.9);
        assert_eq!(c.merge_trace[1].linkage, 0.8);

        // Third merge would have linkage (0.2 + 0.1 + 0.2 + 0.1) / 4.
        let all = cluster_matrix(&four(), 0.0);
        assert_eq!(all.n_clusters(), 1);
        assert!((all.merge_trace[2].linkage - 0.15).abs() < 1e-15);
    }

    #[test]
    fn extreme_thresholds() {
        assert_eq!(cluster_matrix(&four(), 0.95).n_clusters(), 4);
        assert_eq!(cluster_matrix(&four(), 0.1).n_clusters(), 1);
    }

    #[test]
    fn ties_break_on_smallest_ids() {
        let m = matrix(
            &["d", "c", "b", "a"],
            &[
                ("a", "b", 0.5),
                ("c", "d", 0.5),
                ("a", "c", 0.0),
                ("a", "d", 0.0),
                ("b", "c", 0.0),
                ("b", "d", 0.0),
            ],
        );
        let c = cluster_matrix(&m, 0.5);
        assert_eq!(c.merge_trace[0].left, "a");
        assert_eq!(c.merge_trace[0].right, "b");
        assert_eq!(c.merge_trace[1].left, "c");
    }

    #[test]
    fn pair_labels_follow_clusters() {
        let m = matrix(&["a", "b", "c"], &[("a", "b", 0.9), ("a", "c", 0.1), ("b", "c", 0.1)]);
        let c = cluster_matrix(&m, 0.5);
        let pair = |id: &str, a: &str, b: &str| Pair {
            pair_id: id.into(),
            topic_id: "t".into(),
            a: a.into(),
            b: b.into(),
            gold: (),
        };
        let pairs = [pair("p1", "a", "b"), pair("p2", "a", "c")];
        let labels = pair_labels_from_clustering(&c, &pairs).unwrap();
        assert_eq!(labels["p1"], BinaryLabel::Similar);
        assert_eq!(labels["p2"], BinaryLabel::Dissimilar);

        let singletons = cluster_matrix(&m, 2.0);
        let labels = pair_labels_from_clustering(&singletons, &pairs).unwrap();
        assert!(labels.values().all(|l| *l == BinaryLabel::Dissimilar));
        let one = cluster_matrix(&m, -1.0);
        let labels = pair_labels_from_clustering(&one, &pairs).unwrap();
        assert!(labels.values().all(|l| *l == BinaryLabel::Similar));

        let stray = [pair("p3", "a", "zzz")];
        assert!(pair_labels_from_clustering(&c, &stray).is_err());
    }

    #[test]
    fn single_sentence() {
        let m = SimilarityMatrix::new(vec!["x".into()], vec![1.0]).unwrap();
        let c = cluster_matrix(&m, 0.5);
        assert_eq!(c.n_clusters(), 1);
        assert!(c.merge_trace.is_empty());
    }

    #[test]
    fn grid_validation() {
        assert!(normalize_grid(&[]).is_err());
        assert!(normalize_grid(&[f64::NAN]).is_err());
        assert_eq!(normalize_grid(&[0.5, 0.1, 0.5]).unwrap(), vec![0.1, 0.5]);
    }
}
