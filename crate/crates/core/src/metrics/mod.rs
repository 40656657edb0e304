//! Distances between descriptors and distance-matrix assembly.

mod matrix;

use thiserror::Error;

use crate::persistence::{GridSpec, HilbertFunction};
use crate::shape::ShapeError;

pub use matrix::{pairwise_matrix, Descriptor, DistanceMatrix, Metric};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("grid mismatch: {0:?} vs {1:?}")]
    GridMismatch(GridSpec, GridSpec),
    #[error("Hausdorff distance needs two nonempty sets")]
    EmptySet,
    #[error("λ grid is empty")]
    EmptyLambda,
    #[error("need at least 2 descriptors, got {0}")]
    TooFewDescriptors(usize),
    #[error("descriptors are of different kinds")]
    Heterogeneous,
    #[error("metric {metric} does not apply to {kind} descriptors")]
    NotApplicable { metric: &'static str, kind: &'static str },
    #[error("{ids} ids, {labels} labels and {n} descriptors differ in length")]
    LengthMismatch { ids: usize, labels: usize, n: usize },
    #[error("invalid distance matrix: {0}")]
    Invalid(String),
    #[error("distance matrix CSV line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("shape distance between {a} and {b}: {source}")]
    Shape { a: String, b: String, source: ShapeError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MetricError>;

fn same_grid(h0: &HilbertFunction, h1: &HilbertFunction) -> Result<()> {
    if h0.grid() != h1.grid() {
        return Err(MetricError::GridMismatch(*h0.grid(), *h1.grid()));
    }
    Ok(())
}

/// `(∫(h − h′)² dA)^{1/2}` by the midpoint rule, exact for cellwise-constant functions.
pub fn l2_distance(h0: &HilbertFunction, h1: &HilbertFunction) -> Result<f64> {
    same_grid(h0, h1)?;
    let sum: f64 = h0
        .values()
        .iter()
        .zip(h1.values())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok((sum * h0.grid().cell_area()).sqrt())
}

/// Symmetric Hausdorff distance between finite point sets.
pub fn hausdorff<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricError::EmptySet);
    }
    Ok(directed(a, b).max(directed(b, a)))
}

fn directed<const D: usize>(a: &[[f64; D]], b: &[[f64; D]]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|q| p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// `max_λ d_H({h ≤ λ}, {h′ ≤ λ})` over cell centres in parameter coordinates.
///
/// `lambdas` defaults to the integers `0..=max(h, h′)`. A level where both
/// sublevel sets are empty contributes 0; where exactly one is empty it
/// contributes the diagonal of the parameter rectangle.
pub fn sublevel_hausdorff(h0: &HilbertFunction, h1: &HilbertFunction, lambdas: Option<&[f64]>) -> Result<f64> {
    same_grid(h0, h1)?;
    let default: Vec<f64>;
    let lambdas = match lambdas {
        Some(l) => l,
        None => {
            default = (0..=h0.max_value().max(h1.max_value())).map(f64::from).collect();
            &default
        }
    };
    if lambdas.is_empty() {
        return Err(MetricError::EmptyLambda);
    }
    let g = h0.grid();
    let sublevel = |h: &HilbertFunction, lambda: f64| -> Vec<[f64; 2]> {
        let mut out = Vec::new();
        for i in 0..g.n_t {
            for j in 0..g.n_tau {
                if f64::from(h.get(i, j)) <= lambda {
                    out.push(g.cell_center(i, j));
                }
            }
        }
        out
    };
    let mut worst = 0.0f64;
    for &lambda in lambdas {
        let (a, b) = (sublevel(h0, lambda), sublevel(h1, lambda));
        let d = match (a.is_empty(), b.is_empty()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => g.diameter(),
            (false, false) => hausdorff(&a, &b)?,
        };
        worst = worst.max(d);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_t: usize, n_tau: usize) -> GridSpec {
        GridSpec::new((0.0, n_t as f64), n_t, (0.0, n_tau as f64 * 0.5), n_tau).unwrap()
    }

    fn hf(g: GridSpec, f: impl Fn(usize, usize) -> u32) -> HilbertFunction {
        let vals = (0..g.n_t).flat_map(|i| (0..g.n_tau).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        HilbertFunction::new(0, g, vals).unwrap()
    }

    #[test]
    fn l2_constants() {
        let g = GridSpec::new((0.0, 1.0), 4, (0.0, 1.0), 5).unwrap();
        assert!((l2_distance(&hf(g, |_, _| 1), &hf(g, |_, _| 3)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(l2_distance(&hf(g, |i, _| i as u32), &hf(g, |i, _| i as u32)).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch_reports_both() {
        let e = l2_distance(&hf(grid(2, 2), |_, _| 0), &hf(grid(3, 2), |_, _| 0)).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("n_t: 2") && msg.contains("n_t: 3"), "{msg}");
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff(&[[0.0]], &[[0.0], [1.0]]).unwrap(), 1.0);
        assert_eq!(hausdorff(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap(), 5.0);
        let a = [[1.0, 2.0], [3.0, -1.0]];
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert!(matches!(hausdorff::<2>(&[], &a), Err(MetricError::EmptySet)));
    }

    #[test]
    fn sublevel_shift_is_one_cell() {
        let g = grid(8, 3);
        let h0 = hf(g, |i, _| u32::from(i >= 3));
        let h1 = hf(g, |i, _| u32::from(i >= 4));
        assert!((sublevel_hausdorff(&h0, &h1, None).unwrap() - g.dt()).abs() < 1e-12);
        assert_eq!(sublevel_hausdorff(&h0, &h0, None).unwrap(), 0.0);
    }

    #[test]
    fn sublevel_sentinel() {
        let g = grid(4, 4);
        let d = sublevel_hausdorff(&hf(g, |_, _| 0), &hf(g, |_, _| 5), Some(&[1.0])).unwrap();
        assert_eq!(d, g.diameter());
    }
}
