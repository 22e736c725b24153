//! Krippendorff's alpha over the coincidence matrix.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AnnotationRecord;
use crate::corpus::GradedLabel;
use crate::error::{Error, Result};

const K: usize = GradedLabel::ALL.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Binary,
    /// Binary, except that high and some similarity are half as far apart.
    Weighted,
    Custom,
}

/// Symmetric label distance with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    pub matrix: [[f64; K]; K],
}

impl DistanceSpec {
    pub fn binary() -> Self {
        let mut matrix = [[1.0; K]; K];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        DistanceSpec {
            kind: DistanceKind::Binary,
            matrix,
        }
    }

    pub fn weighted() -> Self {
        let mut spec = Self::binary();
        let (h, s) = (GradedLabel::HighSimilarity.index(), GradedLabel::SomeSimilarity.index());
        spec.matrix[h][s] = 0.5;
        spec.matrix[s][h] = 0.5;
        spec.kind = DistanceKind::Weighted;
        spec
    }

    pub fn custom(matrix: [[f64; K]; K]) -> Result<Self> {
        for i in 0..K {
            if matrix[i][i] != 0.0 {
                return Err(Error::invalid("distance matrix needs a zero diagonal"));
            }
            for j in 0..K {
                let d = matrix[i][j];
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::invalid(format!("invalid distance {d}")));
                }
                if d != matrix[j][i] {
                    return Err(Error::invalid("distance matrix is not symmetric"));
                }
            }
        }
        Ok(DistanceSpec {
            kind: DistanceKind::Custom,
            matrix,
        })
    }

    pub fn distance(&self, a: GradedLabel, b: GradedLabel) -> f64 {
        self.matrix[a.index()][b.index()]
    }
}

impl std::str::FromStr for DistanceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Self::binary()),
            "weighted" => Ok(Self::weighted()),
            other => Err(Error::invalid(format!("unknown distance `{other}`"))),
        }
    }
}

/// Alpha = 1 - D_o / D_e. Only units with at least two votes are pairable.
/// When every pairable value is the same label, D_e is zero and agreement is
/// reported as perfect.
pub fn krippendorff_alpha(records: &[AnnotationRecord], distance: &DistanceSpec) -> Result<f64> {
    super::validate_records(records)?;
    let mut units: BTreeMap<&str, [usize; K]> = BTreeMap::new();
    for r in records {
        units.entry(&r.pair_id).or_insert([0; K])[r.label.index()] += 1;
    }

    let mut coincidence = [[0.0; K]; K];
    let mut pairable = false;
    for counts in units.values() {
        let m: usize = counts.iter().sum();
        if m < 2 {
            continue;
        }
        pairable = true;
        for c in 0..K {
            for k in 0..K {
                let pairs = counts[c] * if c == k { counts[k].saturating_sub(1) } else { counts[k] };
                coincidence[c][k] += pairs as f64 / (m - 1) as f64;
            }
        }
    }
    if !pairable {
        return Err(Error::InsufficientData("no pair has two or more annotations".into()));
    }

    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..K {
        for k in 0..K {
            observed += coincidence[c][k] * distance.matrix[c][k];
            expected += marginals[c] * marginals[k] * distance.matrix[c][k];
        }
    }
    observed /= n;
    expected /= n * (n - 1.0);
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - observed / expected)
}
