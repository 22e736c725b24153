//! Seeded generators of small random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CaseRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CaseRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Multiples of 1/16 in [0, 1]: small dyadic values keep every float sum
/// of up to a few dozen terms exact.
pub fn dyadic(rng: &mut CaseRng) -> f64 {
    rng.gen_range(0..=16) as f64 / 16.0
}

/// Symmetric similarity matrix with a unit diagonal.
pub fn similarity_matrix(rng: &mut CaseRng, n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dyadic(rng);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

/// Paired samples with frequent ties and the occasional constant side.
pub fn correlation_sample(rng: &mut CaseRng) -> (Vec<f64>, Vec<f64>) {
    let n = rng.gen_range(2..=12);
    let spread_x = rng.gen_range(1..=8);
    let spread_y = rng.gen_range(1..=8);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..spread_x) as f64 / 4.0 - 1.0).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|v| if rng.gen_bool(0.5) { v * 2.0 } else { rng.gen_range(0..spread_y) as f64 / 4.0 })
        .collect();
    (x, y)
}

/// Binary predictions and gold of equal length; `true` is similar.
pub fn binary_labels(rng: &mut CaseRng) -> (Vec<bool>, Vec<bool>) {
    let n = rng.gen_range(1..=30);
    let p_pred = rng.gen_range(0.0..=1.0);
    let p_gold = rng.gen_range(0.0..=1.0);
    let gold: Vec<bool> = (0..n).map(|_| rng.gen_bool(p_gold)).collect();
    let pred: Vec<bool> = gold
        .iter()
        .map(|&g| if rng.gen_bool(0.5) { g } else { rng.gen_bool(p_pred) })
        .collect();
    (pred, gold)
}

/// Per-unit label lists over `labels` classes for workers `0..workers`;
/// at least one unit has two or more values.
pub fn annotation_units(rng: &mut CaseRng, labels: usize) -> Vec<Vec<(usize, usize)>> {
    let n_units = rng.gen_range(1..=10);
    let workers = rng.gen_range(2..=7);
    let favoured = rng.gen_range(0..labels);
    let bias = rng.gen_range(0.0..=1.0);
    let mut units: Vec<Vec<(usize, usize)>> = (0..n_units)
        .map(|_| {
            let mut ids: Vec<usize> = (0..workers).collect();
            ids.shuffle(rng);
            ids.truncate(rng.gen_range(1..=workers));
            ids.sort_unstable();
            ids.into_iter()
                .map(|w| {
                    let l = if rng.gen_bool(bias) { favoured } else { rng.gen_range(0..labels) };
                    (w, l)
                })
                .collect()
        })
        .collect();
    if units.iter().all(|u| u.len() < 2) {
        let w = (units[0][0].0 + 1) % workers;
        units[0].push((w, rng.gen_range(0..labels)));
    }
    units
}

/// Crowd simulation: five noisy workers who are right with probability
/// `accuracy`, one worker who always copies their majority and one who
/// votes uniformly at random. Returns `(item, worker, label)` votes and the
/// true labels; worker 5 is consistent and worker 6 the spammer.
pub fn crowd(rng: &mut CaseRng, items: usize, labels: usize, accuracy: f64) -> (Vec<(usize, usize, usize)>, Vec<usize>) {
    let truth: Vec<usize> = (0..items).map(|_| rng.gen_range(0..labels)).collect();
    let mut votes = Vec::with_capacity(items * 7);
    for (i, &t) in truth.iter().enumerate() {
        let mut counts = vec![0usize; labels];
        for w in 0..5 {
            let l = if rng.gen_bool(accuracy) { t } else { rng.gen_range(0..labels) };
            counts[l] += 1;
            votes.push((i, w, l));
        }
        let majority = (0..labels).max_by_key(|&l| (counts[l], std::cmp::Reverse(l))).expect("labels");
        votes.push((i, 5, majority));
        votes.push((i, 6, rng.gen_range(0..labels)));
    }
    (votes, truth)
}
