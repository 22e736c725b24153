//! Slow, direct reference implementations for differential testing.
//!
//! Everything here evaluates the textbook formula in exact rational
//! arithmetic, with no attempt at efficiency. Floating-point inputs are
//! converted exactly, so the only rounding happens when a result is turned
//! back into an `f64`.

pub mod cases;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(x: f64) -> Q {
    BigRational::from_float(x).expect("finite input")
}

pub fn qi(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().expect("representable")
}

fn mean(xs: &[Q]) -> Q {
    xs.iter().fold(Q::zero(), |a, b| a + b) / qi(xs.len() as i64)
}

/// Pearson correlation; `None` when either side is constant.
pub fn pearson_exact(x: &[Q], y: &[Q]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = Q::zero();
    let mut sxx = Q::zero();
    let mut syy = Q::zero();
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - &mx, b - &my);
        sxy += &dx * &dy;
        sxx += &dx * &dx;
        syy += &dy * &dy;
    }
    if sxx.is_zero() || syy.is_zero() {
        return None;
    }
    let r2 = (&sxy * &sxy) / (sxx * syy);
    let r = to_f64(&r2).sqrt();
    Some(if sxy.is_negative() { -r } else { r })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let x: Vec<Q> = x.iter().map(|&v| q(v)).collect();
    let y: Vec<Q> = y.iter().map(|&v| q(v)).collect();
    pearson_exact(&x, &y)
}

/// Rank of each value counting from 1, ties sharing the mean of their ranks.
pub fn average_ranks(x: &[f64]) -> Vec<Q> {
    x.iter()
        .map(|v| {
            let below = x.iter().filter(|w| *w < v).count() as i64;
            let equal = x.iter().filter(|w| *w == v).count() as i64;
            qi(below + 1) + Q::new(BigInt::from(equal - 1), BigInt::from(2))
        })
        .collect()
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_exact(&average_ranks(x), &average_ranks(y))
}

/// F1 of the similar (`true`) label, F1 of the dissimilar label and their
/// mean, computed from precision and recall.
pub fn f_scores(pred: &[bool], gold: &[bool]) -> (f64, f64, f64) {
    assert_eq!(pred.len(), gold.len());
    let f = |positive: bool| -> Q {
        let tp = pred.iter().zip(gold).filter(|(p, g)| **p == positive && **g == positive).count() as i64;
        let predicted = pred.iter().filter(|p| **p == positive).count() as i64;
        let actual = gold.iter().filter(|g| **g == positive).count() as i64;
        if tp == 0 {
            return Q::zero();
        }
        let p = Q::new(BigInt::from(tp), BigInt::from(predicted));
        let r = Q::new(BigInt::from(tp), BigInt::from(actual));
        qi(2) * &p * &r / (p + r)
    };
    let (s, d) = (f(true), f(false));
    let m = (&s + &d) / qi(2);
    (to_f64(&s), to_f64(&d), to_f64(&m))
}

/// Krippendorff's alpha from its pairable-values definition. `units` lists
/// the label indices given to each unit; `distance[c][k]` is the label
/// distance. `None` when no unit has two values.
pub fn krippendorff_alpha(units: &[Vec<usize>], distance: &[Vec<f64>]) -> Option<f64> {
    let delta = |a: usize, b: usize| q(distance[a][b]);
    let pairable: Vec<&Vec<usize>> = units.iter().filter(|u| u.len() >= 2).collect();
    if pairable.is_empty() {
        return None;
    }
    let n: i64 = pairable.iter().map(|u| u.len() as i64).sum();

    let mut observed = Q::zero();
    for u in &pairable {
        let mut within = Q::zero();
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    within += delta(u[i], u[j]);
                }
            }
        }
        observed += within / qi(u.len() as i64 - 1);
    }
    observed /= qi(n);

    let values: Vec<usize> = pairable.iter().flat_map(|u| u.iter().copied()).collect();
    let mut expected = Q::zero();
    for i in 0..values.len() {
        for j in 0..values.len() {
            if i != j {
                expected += delta(values[i], values[j]);
            }
        }
    }
    expected /= qi(n) * qi(n - 1);

    if expected.is_zero() {
        return Some(1.0);
    }
    Some(to_f64(&(Q::one() - observed / expected)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveClustering {
    /// Clusters as sorted index lists, ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
    /// Linkage of every merge performed, in order.
    pub linkages: Vec<f64>,
}

/// Average-linkage agglomerative clustering that recomputes every
/// cluster-pair linkage from scratch at each step. Merging stops once the
/// best linkage falls below `threshold`. Among equal linkages the pair whose
/// smallest members are lexicographically smallest merges first.
pub fn naive_average_linkage(sim: &[Vec<f64>], threshold: f64) -> NaiveClustering {
    let n = sim.len();
    let exact: Vec<Vec<Q>> = sim.iter().map(|row| row.iter().map(|&v| q(v)).collect()).collect();
    let threshold = q(threshold);
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut linkages = Vec::new();
    loop {
        let mut best: Option<(Q, usize, usize)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let mut total = Q::zero();
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        total += &exact[a][b];
                    }
                }
                let link = total / qi((clusters[i].len() * clusters[j].len()) as i64);
                if best.as_ref().is_none_or(|(l, _, _)| link > *l) {
                    best = Some((link, i, j));
                }
            }
        }
        match best {
            Some((link, i, j)) if link >= threshold => {
                linkages.push(to_f64(&link));
                let merged = clusters.remove(j);
                clusters[i].extend(merged);
                clusters[i].sort_unstable();
                clusters.sort();
            }
            _ => break,
        }
    }
    NaiveClustering { clusters, linkages }
}

/// Counts sentence triples whose three pairs are all labeled and exactly two
/// of them similar. Pairs are `(a, b, similar)`; a repeated sentence pair
/// keeps its first label.
pub fn transitivity_violations(pairs: &[(&str, &str, bool)]) -> (usize, usize) {
    let mut label: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    for &(a, b, s) in pairs {
        let key = if a <= b { (a, b) } else { (b, a) };
        label.entry(key).or_insert(s);
    }
    let mut ids: Vec<&str> = pairs.iter().flat_map(|p| [p.0, p.1]).collect();
    ids.sort_unstable();
    ids.dedup();
    let (mut violated, mut total) = (0, 0);
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            for k in (j + 1)..ids.len() {
                let l = [
                    label.get(&(ids[i], ids[j])),
                    label.get(&(ids[i], ids[k])),
                    label.get(&(ids[j], ids[k])),
                ];
                if l.iter().any(|x| x.is_none()) {
                    continue;
                }
                total += 1;
                if l.iter().filter(|x| **x == Some(&true)).count() == 2 {
                    violated += 1;
                }
            }
        }
    }
    (violated, total)
}
