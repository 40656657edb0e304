use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{groups, Result, StatsError};
use crate::metrics::DistanceMatrix;

/// Summary of between-group distances used as the test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Mean,
    Median,
}

impl Statistic {
    pub fn as_str(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Median => "median",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationResult {
    pub observed_statistic: f64,
    pub null_statistics: Vec<f64>,
    pub p_value: f64,
    pub seed: u64,
    pub statistic: Statistic,
}

#[derive(Serialize)]
struct Summary<'a> {
    statistic: f64,
    p_value: f64,
    n_perm: usize,
    seed: u64,
    statistic_kind: &'a str,
}

impl PermutationResult {
    pub fn n_perm(&self) -> usize {
        self.null_statistics.len()
    }

    /// JSON `{statistic, p_value, n_perm, seed, statistic_kind}`.
    pub fn to_json(&self) -> String {
        let s = Summary {
            statistic: self.observed_statistic,
            p_value: self.p_value,
            n_perm: self.n_perm(),
            seed: self.seed,
            statistic_kind: self.statistic.as_str(),
        };
        serde_json::to_string_pretty(&s).expect("plain struct serialises") + "\n"
    }

    /// CSV `replicate,statistic` of the null distribution.
    pub fn write_null_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "replicate,statistic")?;
        for (r, v) in self.null_statistics.iter().enumerate() {
            writeln!(w, "{r},{v:?}")?;
        }
        Ok(())
    }
}

fn between(dm: &DistanceMatrix, in_first: &[bool], kind: Statistic) -> f64 {
    let n = dm.len();
    let mut values = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if in_first[i] != in_first[j] {
                values.push(dm.get(i, j));
            }
        }
    }
    match kind {
        Statistic::Mean => values.iter().sum::<f64>() / values.len() as f64,
        Statistic::Median => {
            values.sort_by(f64::total_cmp);
            let m = values.len();
            if m % 2 == 1 {
                values[m / 2]
            } else {
                0.5 * (values[m / 2 - 1] + values[m / 2])
            }
        }
    }
}

/// Two-sample permutation test with the mean between-group distance.
pub fn permutation_test(dm: &DistanceMatrix, n_perm: usize, seed: u64) -> Result<PermutationResult> {
    permutation_test_with(dm, n_perm, seed, Statistic::Mean)
}

/// Two-sample permutation test on the labels of `dm`.
///
/// Replicate `r` shuffles the labels with a generator seeded by `seed + r`,
/// so the null distribution does not depend on scheduling. The p-value is
/// `(1 + #{null ≥ observed}) / (1 + n_perm)`, with a relative tolerance of
/// 1e-12 so that ties caused by summation order still count.
pub fn permutation_test_with(dm: &DistanceMatrix, n_perm: usize, seed: u64, kind: Statistic) -> Result<PermutationResult> {
    let names = groups(dm.labels());
    if names.len() != 2 {
        return Err(StatsError::GroupCount(names));
    }
    for name in &names {
        let size = dm.labels().iter().filter(|l| *l == name).count();
        if size < 2 {
            return Err(StatsError::GroupTooSmall { label: name.clone(), size, min: 2 });
        }
    }
    if n_perm == 0 {
        return Err(StatsError::NoPermutations);
    }
    let in_first: Vec<bool> = dm.labels().iter().map(|l| *l == names[0]).collect();
    let observed = between(dm, &in_first, kind);
    let null: Vec<f64> = (0..n_perm as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
            let mut shuffled = in_first.clone();
            shuffled.shuffle(&mut rng);
            between(dm, &shuffled, kind)
        })
        .collect();
    let threshold = observed - 1e-12 * observed.abs();
    let extreme = null.iter().filter(|&&v| v >= threshold).count();
    Ok(PermutationResult {
        observed_statistic: observed,
        null_statistics: null,
        p_value: (1 + extreme) as f64 / (1 + n_perm) as f64,
        seed,
        statistic: kind,
    })
}
