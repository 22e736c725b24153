use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{BinaryLabel, Pair};

/// Sentence triples whose three pairs are all labeled. A triple violates
/// transitivity when exactly two of its three pairs are similar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitivityReport {
    pub violated: usize,
    pub total_triples: usize,
    pub fraction: f64,
    /// Labeled pairs that repeat an already seen sentence pair; the label of
    /// the first occurrence (by pair id) is used.
    pub duplicate_pairs: usize,
}

pub fn transitivity_report<'a, G: 'a>(
    gold: &BTreeMap<String, BinaryLabel>,
    pairs: impl IntoIterator<Item = &'a Pair<G>>,
) -> TransitivityReport {
    let mut by_id: Vec<&Pair<G>> = pairs.into_iter().filter(|p| gold.contains_key(&p.pair_id)).collect();
    by_id.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));

    let mut edges: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    let mut adjacency: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut duplicate_pairs = 0;
    for p in by_id {
        let key = p.sentence_key();
        if edges.contains_key(&key) {
            duplicate_pairs += 1;
            continue;
        }
        edges.insert(key, gold[&p.pair_id].is_similar());
        adjacency.entry(key.0).or_default().insert(key.1);
        adjacency.entry(key.1).or_default().insert(key.0);
    }

    let (mut violated, mut total) = (0, 0);
    for (&(a, b), &ab) in &edges {
        // a < b; visit each triple once via its two smallest members
        let (na, nb) = (&adjacency[a], &adjacency[b]);
        for &c in na.range::<&str, _>((std::ops::Bound::Excluded(b), std::ops::Bound::Unbounded)) {
            if nb.contains(c) {
                total += 1;
                let similar = usize::from(ab) + usize::from(edges[&(a, c)]) + usize::from(edges[&(b, c)]);
                if similar == 2 {
                    violated += 1;
                }
            }
        }
    }
    TransitivityReport {
        violated,
        total_triples: total,
        fraction: if total == 0 { 0.0 } else { violated as f64 / total as f64 },
        duplicate_pairs,
    }
}
