use serde::Serialize;

use crate::error::{Error, Result};

/// Pearson and Spearman correlation of one topic. `None` marks an undefined
/// coefficient (constant input); it is serialized as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub topic: String,
    pub n: usize,
    pub pearson_r: Option<f64>,
    pub spearman_rho: Option<f64>,
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!("correlation needs at least 2 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("correlation input contains non-finite values"));
    }
    Ok(())
}

/// Sample Pearson product-moment correlation; `None` if either input is
/// constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check(x, y)?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// 1-based ranks with ties assigned their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share the mean rank
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

pub fn correlation_report(topic: &str, predicted: &[f64], gold: &[f64]) -> Result<CorrelationReport> {
    Ok(CorrelationReport {
        topic: topic.to_string(),
        n: predicted.len(),
        pearson_r: pearson(predicted, gold)?,
        spearman_rho: spearman(predicted, gold)?,
    })
}

/// Macro average over topics. A coefficient undefined on any topic stays
/// undefined in the average.
pub fn macro_average(reports: &[CorrelationReport]) -> CorrelationReport {
    let avg = |f: fn(&CorrelationReport) -> Option<f64>| -> Option<f64> {
        if reports.is_empty() {
            return None;
        }
        let vals: Option<Vec<f64>> = reports.iter().map(f).collect();
        vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    CorrelationReport {
        topic: "average".into(),
        n: reports.iter().map(|r| r.n).sum(),
        pearson_r: avg(|r| r.pearson_r),
        spearman_rho: avg(|r| r.spearman_rho),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap().unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap().unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[1.0, 3.0, 2.0, 4.0]).unwrap().unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(pearson(&x, &[5.0; 4]).unwrap(), None);
        assert!(pearson(&x, &[1.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn spearman_examples() {
        let x = [0.5, -1.0, 2.0, 3.5, 1.0];
        let cubed: Vec<f64> = x.iter().map(|v| v * v * v).collect();
        assert!((spearman(&x, &cubed).unwrap().unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]).unwrap(), None);
    }

    #[test]
    fn tied_ranks() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[3.0, 3.0, 3.0]), vec![2.0, 2.0, 2.0]);
        // ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): sxy = 4.5, sxx = 4.5, syy = 5
        let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap().unwrap();
        assert!((rho - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn macro_average_propagates_na() {
        let r = |p: Option<f64>| CorrelationReport {
            topic: "t".into(),
            n: 3,
            pearson_r: p,
            spearman_rho: Some(0.5),
        };
        let avg = macro_average(&[r(Some(0.2)), r(Some(0.4))]);
        assert!((avg.pearson_r.unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(avg.n, 6);
        assert_eq!(macro_average(&[r(Some(0.2)), r(None)]).pearson_r, None);
    }

    proptest! {
        #[test]
        fn affine_invariance(
            x in prop::collection::vec(-100.0f64..100.0, 3..30),
            a in prop_oneof![0.01f64..50.0, -50.0f64..-0.01],
            b in -10.0f64..10.0,
        ) {
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            if let Some(r) = pearson(&x, &y).unwrap() {
                prop_assert!((r - a.signum()).abs() < 1e-9);
            }
        }

        #[test]
        fn symmetric_and_monotone_invariant(
            pts in prop::collection::vec((-5i32..5, -5i32..5), 2..25),
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1 as f64).collect();
            prop_assert_eq!(pearson(&x, &y).unwrap(), pearson(&y, &x).unwrap());
            prop_assert_eq!(spearman(&x, &y).unwrap(), spearman(&y, &x).unwrap());
            let mx: Vec<f64> = x.iter().map(|v| v.exp() + 3.0 * v).collect();
            let my: Vec<f64> = y.iter().map(|v| 1.0 / (10.0 - v)).collect();
            let (s, t) = (spearman(&x, &y).unwrap(), spearman(&mx, &my).unwrap());
            match (s, t) {
                (Some(s), Some(t)) => prop_assert!((s - t).abs() < 1e-12),
                (s, t) => prop_assert_eq!(s, t),
            }
        }
    }
}
