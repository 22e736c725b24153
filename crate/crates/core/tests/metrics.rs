use std::collections::BTreeMap;

use argclust::annotation::{krippendorff_alpha, AnnotationRecord, DistanceSpec};
use argclust::corpus::{BinaryLabel, GradedLabel, Pair};
use argclust::evaluation::{binary_f_scores, pearson, spearman, transitivity_report};
use argclust::similarity::cosine;
use argclust_oracle::{self as oracle, cases};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= TOL,
        (None, None) => true,
        _ => false,
    }
}

fn labels(v: &[bool]) -> BTreeMap<String, BinaryLabel> {
    v.iter()
        .enumerate()
        .map(|(i, &s)| (format!("p{i:03}"), if s { BinaryLabel::Similar } else { BinaryLabel::Dissimilar }))
        .collect()
}

pub fn records(units: &[Vec<(usize, usize)>]) -> Vec<AnnotationRecord> {
    units
        .iter()
        .enumerate()
        .flat_map(|(u, votes)| {
            votes.iter().map(move |&(w, l)| {
                AnnotationRecord::new(&format!("u{u}"), &format!("w{w}"), GradedLabel::from_index(l).unwrap())
            })
        })
        .collect()
}

#[test]
fn pearson_and_spearman_match_exact_reference() {
    let mut rng = cases::rng(1);
    let mut na = 0;
    for case in 0..600 {
        let (x, y) = cases::correlation_sample(&mut rng);
        let p = pearson(&x, &y).unwrap();
        let s = spearman(&x, &y).unwrap();
        assert!(close(p, oracle::pearson(&x, &y)), "case {case}: {x:?} {y:?}");
        assert!(close(s, oracle::spearman(&x, &y)), "case {case}: {x:?} {y:?}");
        na += usize::from(p.is_none());
    }
    assert!(na > 0 && na < 300, "generator should exercise both branches, got {na} NA");
}

#[test]
fn f_scores_match_exact_reference() {
    let mut rng = cases::rng(2);
    for case in 0..600 {
        let (pred, gold) = cases::binary_labels(&mut rng);
        let got = binary_f_scores(&labels(&pred), &labels(&gold)).unwrap();
        let (s, d, m) = oracle::f_scores(&pred, &gold);
        assert!((got.f_sim - s).abs() <= TOL, "case {case}");
        assert!((got.f_dissim - d).abs() <= TOL, "case {case}");
        assert!((got.f_mean - m).abs() <= TOL, "case {case}");
        assert_eq!(got.f_mean, (got.f_sim + got.f_dissim) / 2.0);
    }
}

#[test]
fn alpha_matches_exact_reference() {
    let mut rng = cases::rng(3);
    for case in 0..600 {
        let units = cases::annotation_units(&mut rng, 4);
        let recs = records(&units);
        let plain: Vec<Vec<usize>> = units.iter().map(|u| u.iter().map(|v| v.1).collect()).collect();
        for spec in [DistanceSpec::binary(), DistanceSpec::weighted()] {
            let dist: Vec<Vec<f64>> = spec.matrix.iter().map(|r| r.to_vec()).collect();
            let got = krippendorff_alpha(&recs, &spec).unwrap();
            let want = oracle::krippendorff_alpha(&plain, &dist).unwrap();
            assert!((got - want).abs() <= TOL, "case {case}: {got} vs {want} for {units:?}");
        }
    }
}

#[test]
fn transitivity_matches_brute_force() {
    let mut rng = cases::rng(4);
    for _ in 0..300 {
        let n = rand::Rng::gen_range(&mut rng, 3..8);
        let mut pairs = Vec::new();
        let mut gold = BTreeMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rand::Rng::gen_bool(&mut rng, 0.7) {
                    let id = format!("p{:02}", pairs.len());
                    let similar = rand::Rng::gen_bool(&mut rng, 0.4);
                    gold.insert(id.clone(), if similar { BinaryLabel::Similar } else { BinaryLabel::Dissimilar });
                    pairs.push(Pair { pair_id: id, topic_id: "t".to_string(), a: format!("s{i}"), b: format!("s{j}"), gold: () });
                }
            }
        }
        let report = transitivity_report(&gold, &pairs);
        let triples: Vec<(&str, &str, bool)> =
            pairs.iter().map(|p| (p.a.as_str(), p.b.as_str(), gold[&p.pair_id].is_similar())).collect();
        assert_eq!((report.violated, report.total_triples), oracle::transitivity_violations(&triples));
    }
}

#[test]
fn alpha_hand_example() {
    use GradedLabel::*;
    let r = |p: &str, w: &str, l| AnnotationRecord::new(p, w, l);
    // coincidences o_AA = 2, o_AB = o_BA = 1 give D_o = 1/2 and D_e = 6/12
    let recs = vec![r("1", "a", NoSimilarity), r("1", "b", NoSimilarity), r("2", "a", NoSimilarity), r("2", "b", HighSimilarity)];
    assert!(krippendorff_alpha(&recs, &DistanceSpec::binary()).unwrap().abs() < 1e-15);
    // n = 6 pairable values; binary D_o = 2/6, D_e = 22/30; weighted D_o = 1/6, D_e = 19/30
    let graded = vec![
        r("1", "a", HighSimilarity),
        r("1", "b", SomeSimilarity),
        r("2", "a", NoSimilarity),
        r("2", "b", NoSimilarity),
        r("3", "a", HighSimilarity),
        r("3", "b", HighSimilarity),
    ];
    let binary = krippendorff_alpha(&graded, &DistanceSpec::binary()).unwrap();
    let weighted = krippendorff_alpha(&graded, &DistanceSpec::weighted()).unwrap();
    assert!((binary - 6.0 / 11.0).abs() < 1e-15);
    assert!((weighted - 14.0 / 19.0).abs() < 1e-15);
    assert!(weighted > binary);
}

fn alpha_units() -> impl Strategy<Value = Vec<Vec<(usize, usize)>>> {
    any::<u64>().prop_map(|seed| cases::annotation_units(&mut cases::rng(seed), 4))
}

proptest! {
    #[test]
    fn alpha_ignores_item_and_worker_names(units in alpha_units(), shift in 1usize..50) {
        let recs = records(&units);
        let renamed: Vec<AnnotationRecord> = recs
            .iter()
            .map(|r| AnnotationRecord::new(&format!("x{}{}", shift, r.pair_id), &format!("{}{}", r.worker_id, shift), r.label))
            .rev()
            .collect();
        for spec in [DistanceSpec::binary(), DistanceSpec::weighted()] {
            let a = krippendorff_alpha(&recs, &spec).unwrap();
            let b = krippendorff_alpha(&renamed, &spec).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn alpha_is_one_iff_no_observed_disagreement(units in alpha_units()) {
        let recs = records(&units);
        let alpha = krippendorff_alpha(&recs, &DistanceSpec::binary()).unwrap();
        let agree = units.iter().filter(|u| u.len() >= 2).all(|u| u.iter().all(|v| v.1 == u[0].1));
        prop_assert_eq!(agree, (alpha - 1.0).abs() < 1e-12, "alpha {}", alpha);
    }

    #[test]
    fn f_mean_is_the_mean_of_both_f1(seed in any::<u64>()) {
        let (pred, gold) = cases::binary_labels(&mut cases::rng(seed));
        let f = binary_f_scores(&labels(&pred), &labels(&gold)).unwrap();
        prop_assert_eq!(f.f_mean, (f.f_sim + f.f_dissim) / 2.0);
    }

    #[test]
    fn cosine_is_scale_invariant(
        v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..20),
        a in 0.01f64..100.0,
        b in 0.01f64..100.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let xs: Vec<f64> = x.iter().map(|t| t * a).collect();
        let ys: Vec<f64> = y.iter().map(|t| t * b).collect();
        prop_assert!((cosine(&x, &y).unwrap() - cosine(&xs, &ys).unwrap()).abs() < 1e-9);
    }
}
