use std::io::Write;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};

use super::{Result, StatsError};
use crate::metrics::DistanceMatrix;

/// Classical MDS coordinates.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// `n × m`, one row per subject.
    pub coordinates: DMatrix<f64>,
    /// All eigenvalues of the double-centred Gram matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues below `-tol` that were treated as zero.
    pub negative_eigenvalues: usize,
    /// Set when fewer than `m` eigenvalues were positive and zero columns were added.
    pub padded: bool,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.coordinates.ncols()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.coordinates.row(i) - self.coordinates.row(j)).norm()
    }

    /// CSV `id,label,x1..xm`.
    pub fn write_csv<W: Write>(&self, mut w: W, dm: &DistanceMatrix) -> std::io::Result<()> {
        write!(w, "id,label")?;
        for k in 1..=self.dim() {
            write!(w, ",x{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.coordinates.nrows() {
            write!(w, "{},{}", dm.ids()[i], dm.labels()[i])?;
            for k in 0..self.dim() {
                write!(w, ",{:.16e}", self.coordinates[(i, k)])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Embeds `dm` in `R^m` from the top eigenpairs of `-½ J D² J`.
///
/// Each eigenvector's sign is fixed so that its largest-magnitude entry is
/// positive, which makes the output deterministic.
pub fn classical_mds(dm: &DistanceMatrix, m: usize) -> Result<Embedding> {
    let n = dm.len();
    if m == 0 || m > n {
        return Err(StatsError::BadDimension { m, n });
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| dm.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| d2.row(i).mean()).collect();
    let total = d2.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + total));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let scale = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let negative = eigenvalues.iter().filter(|&&l| l < -tol).count();
    if negative > 0 {
        warn!("classical MDS: {negative} negative eigenvalue(s) clamped to zero");
    }
    let mut coordinates = DMatrix::zeros(n, m);
    let mut padded = false;
    for (col, &k) in order.iter().take(m).enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= tol {
            padded = true;
            continue;
        }
        let mut v = eig.eigenvectors.column(k).into_owned();
        let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        if pivot < 0.0 {
            v = -v;
        }
        coordinates.set_column(col, &(v * lambda.sqrt()));
    }
    if padded {
        warn!("classical MDS: fewer than {m} positive eigenvalues; padded with zero columns");
    }
    Ok(Embedding { coordinates, eigenvalues, negative_eigenvalues: negative, padded })
}
