//! Argument similarity and aspect clustering toolkit.
//!
//! The crate is organised around the stages of a cross-topic argument
//! clustering experiment:
//!
//! * [`corpus`] loads pair-annotated corpora, binarizes graded labels and
//!   plans cross-topic folds.
//! * [`annotation`] consolidates crowd votes with MACE, computes
//!   Krippendorff's alpha and estimates human performance.
//! * [`similarity`] provides the pairwise similarity `d(a, b)` as Tf-Idf
//!   cosine, embedding cosine or a precomputed score matrix.
//! * [`clustering`] runs average-linkage agglomerative clustering with a
//!   stopping threshold and converts clusters into pair labels.
//! * [`evaluation`] holds every metric: F scores, correlations,
//!   classification reports, transitivity, baselines and learning curves.
//! * [`experiment`] wires the pieces into per-fold harnesses.
//!
//! All randomised procedures take an explicit seed; see [`rng`].

pub mod annotation;
pub mod clustering;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod rng;
pub mod similarity;

pub use error::{Error, Result};
