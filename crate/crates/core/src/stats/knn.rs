use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{groups, Result, StatsError};
use crate::metrics::DistanceMatrix;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub id: String,
    pub truth: String,
    pub predicted: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnnReport {
    pub k: usize,
    pub holdout: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// Fraction of each class's holdout subjects classified correctly.
    pub recall: BTreeMap<String, f64>,
    pub predictions: Vec<Prediction>,
}

impl KnnReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serialises") + "\n"
    }
}

/// k-nearest-neighbour classification on a seeded stratified split.
///
/// Each label group contributes `round(holdout · size)` subjects to the
/// holdout set (at least one, and always leaving one for training). Holdout
/// subjects take the majority label of their `k` nearest training subjects;
/// distance ties are broken by subject index.
pub fn knn_classify(dm: &DistanceMatrix, k: usize, holdout: f64, seed: u64) -> Result<KnnReport> {
    if !(holdout > 0.0 && holdout < 1.0) {
        return Err(StatsError::BadHoldout(holdout));
    }
    if k % 2 == 0 {
        return Err(StatsError::EvenK(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::new();
    let mut train = Vec::new();
    for name in groups(dm.labels()) {
        let mut members: Vec<usize> = (0..dm.len()).filter(|&i| dm.labels()[i] == name).collect();
        members.shuffle(&mut rng);
        let take = if members.len() < 2 { 0 } else { ((holdout * members.len() as f64).round() as usize).clamp(1, members.len() - 1) };
        test.extend_from_slice(&members[..take]);
        train.extend_from_slice(&members[take..]);
    }
    test.sort_unstable();
    train.sort_unstable();
    if k >= train.len() {
        return Err(StatsError::KTooLarge { k, train: train.len() });
    }
    let mut predictions = Vec::with_capacity(test.len());
    for &i in &test {
        let mut near = train.clone();
        near.sort_by(|&a, &b| dm.get(i, a).total_cmp(&dm.get(i, b)).then(a.cmp(&b)));
        let mut votes: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
        for (rank, &j) in near.iter().take(k).enumerate() {
            let e = votes.entry(dm.labels()[j].as_str()).or_insert((0, rank));
            e.0 += 1;
        }
        // most votes, then the label whose nearest voter ranks first
        let predicted = votes
            .iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .map(|(l, _)| l.to_string())
            .expect("k ≥ 1");
        predictions.push(Prediction { id: dm.ids()[i].clone(), truth: dm.labels()[i].clone(), predicted });
    }
    let correct = predictions.iter().filter(|p| p.truth == p.predicted).count();
    let mut recall = BTreeMap::new();
    for name in groups(dm.labels()) {
        let of_class: Vec<&Prediction> = predictions.iter().filter(|p| p.truth == name).collect();
        if !of_class.is_empty() {
            let hit = of_class.iter().filter(|p| p.predicted == name).count();
            recall.insert(name, hit as f64 / of_class.len() as f64);
        }
    }
    Ok(KnnReport {
        k,
        holdout,
        seed,
        n_train: train.len(),
        n_test: test.len(),
        accuracy: if test.is_empty() { 0.0 } else { correct as f64 / test.len() as f64 },
        recall,
        predictions,
    })
}
