//! Inference on distance matrices: permutation tests, classical MDS and
//! nearest-neighbour classification.
//!
//! Every randomised routine draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, so results are identical across platforms.

mod knn;
mod mds;
mod permutation;

use thiserror::Error;

pub use knn::{knn_classify, KnnReport, Prediction};
pub use mds::{classical_mds, Embedding};
pub use permutation::{permutation_test, permutation_test_with, PermutationResult, Statistic};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("expected exactly two label groups, found {0:?}")]
    GroupCount(Vec<String>),
    #[error("group `{label}` has {size} members; at least {min} required")]
    GroupTooSmall { label: String, size: usize, min: usize },
    #[error("permutation count must be at least 1")]
    NoPermutations,
    #[error("embedding dimension {m} not in 1..={n}")]
    BadDimension { m: usize, n: usize },
    #[error("holdout fraction must lie in (0, 1), got {0}")]
    BadHoldout(f64),
    #[error("k must be odd, got {0}")]
    EvenK(usize),
    #[error("k = {k} must be smaller than the training size {train}")]
    KTooLarge { k: usize, train: usize },
}

pub type Result<T> = std::result::Result<T, StatsError>;

/// Distinct labels in sorted order.
fn groups(labels: &[String]) -> Vec<String> {
    let mut g: Vec<String> = labels.to_vec();
    g.sort();
    g.dedup();
    g
}
