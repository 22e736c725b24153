//! Deterministic cross-topic and within-topic fold plans.
//!
//! Topics are sorted, shuffled with a seeded generator and chunked. Dev
//! topics are drawn per fold from that fold's non-test topics.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::corpus::Pair;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub fold_id: usize,
    pub train_topics: BTreeSet<String>,
    pub dev_topics: BTreeSet<String>,
    pub test_topics: BTreeSet<String>,
}

impl FoldPlan {
    /// Train and dev topics together.
    pub fn non_test_topics(&self) -> BTreeSet<String> {
        self.train_topics.union(&self.dev_topics).cloned().collect()
    }
}

/// A within-topic split over pair ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSplit {
    pub fold_id: usize,
    pub train_pairs: Vec<String>,
    pub test_pairs: Vec<String>,
}

/// Splits `items` into `k` contiguous blocks whose sizes differ by at most one.
fn chunk<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let base = items.len() / k;
    let extra = items.len() % k;
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        out.push(items[start..start + len].to_vec());
        start += len;
    }
    out
}

/// Cross-topic folds: every topic is tested exactly once; per fold
/// `dev_per_fold` of the remaining topics are held out for tuning.
///
/// With 28 topics and `k = 4` this gives 7 test, 17 train and 4 dev topics
/// per fold. When `k` does not divide the topic count the test blocks differ
/// in size by at most one.
pub fn make_aspect_folds<'a, I>(topics: I, k: usize, dev_per_fold: usize, seed: u64) -> Result<Vec<FoldPlan>>
where
    I: IntoIterator<Item = &'a String>,
{
    let mut sorted: Vec<String> = topics.into_iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if k == 0 {
        return Err(Error::invalid("number of folds must be positive"));
    }
    if sorted.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} topics cannot be split into {k} folds",
            sorted.len()
        )));
    }
    sorted.shuffle(&mut rng::stream(seed, 0));
    let blocks = chunk(&sorted, k);
    blocks
        .iter()
        .enumerate()
        .map(|(fold_id, test)| {
            let test_topics: BTreeSet<String> = test.iter().cloned().collect();
            let mut rest: Vec<String> = sorted
                .iter()
                .filter(|t| !test_topics.contains(*t))
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if dev_per_fold >= rest.len() && dev_per_fold > 0 {
                return Err(Error::InsufficientData(format!(
                    "fold {fold_id}: {dev_per_fold} dev topics leave no training topics out of {}",
                    rest.len()
                )));
            }
            rest.shuffle(&mut rng::stream(seed, 1 + fold_id as u64));
            let dev_topics: BTreeSet<String> = rest[..dev_per_fold].iter().cloned().collect();
            let train_topics: BTreeSet<String> = rest[dev_per_fold..].iter().cloned().collect();
            Ok(FoldPlan {
                fold_id,
                train_topics,
                dev_topics,
                test_topics,
            })
        })
        .collect()
}

/// Leave-one-topic-out folds, one per topic in sorted order.
pub fn make_afs_folds<'a, I>(topics: I) -> Result<Vec<FoldPlan>>
where
    I: IntoIterator<Item = &'a String>,
{
    let all: BTreeSet<String> = topics.into_iter().cloned().collect();
    if all.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "leave-one-topic-out needs at least 2 topics, got {}",
            all.len()
        )));
    }
    Ok(all
        .iter()
        .enumerate()
        .map(|(fold_id, test)| FoldPlan {
            fold_id,
            train_topics: all.iter().filter(|t| *t != test).cloned().collect(),
            dev_topics: BTreeSet::new(),
            test_topics: BTreeSet::from([test.clone()]),
        })
        .collect())
}

/// Within-topic k-fold splits. Each topic's pairs are shuffled and cut into
/// `k` near-equal blocks; fold `i` tests block `i` of every topic.
pub fn make_within_topic_folds<G>(pairs: &[Pair<G>], k: usize, seed: u64) -> Result<Vec<PairSplit>> {
    if k < 2 {
        return Err(Error::invalid("within-topic cross-validation needs k >= 2"));
    }
    let mut by_topic: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in pairs {
        by_topic.entry(&p.topic_id).or_default().push(&p.pair_id);
    }
    let mut test_blocks: Vec<BTreeSet<String>> = vec![BTreeSet::new(); k];
    for (t, (topic, ids)) in by_topic.iter_mut().enumerate() {
        if ids.len() < k {
            return Err(Error::InsufficientData(format!(
                "topic `{topic}` has {} pairs, fewer than {k} folds",
                ids.len()
            )));
        }
        ids.sort_unstable();
        ids.shuffle(&mut rng::stream(seed, t as u64));
        for (block, chunk) in test_blocks.iter_mut().zip(chunk(ids, k)) {
            block.extend(chunk.into_iter().map(str::to_string));
        }
    }
    Ok(test_blocks
        .into_iter()
        .enumerate()
        .map(|(fold_id, test)| PairSplit {
            fold_id,
            train_pairs: pairs
                .iter()
                .filter(|p| !test.contains(&p.pair_id))
                .map(|p| p.pair_id.clone())
                .collect(),
            test_pairs: pairs
                .iter()
                .filter(|p| test.contains(&p.pair_id))
                .map(|p| p.pair_id.clone())
                .collect(),
        })
        .collect())
}
