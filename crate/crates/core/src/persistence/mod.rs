//! Vietoris–Rips bifiltrations over valued point clouds, barcodes by GF(2)
//! reduction, and Hilbert (dimension) functions on a parameter grid.
//!
//! A point `x` with value `f(x)` enters at grade `(0, f(x))`; a simplex
//! enters at `(diameter, max value)`. Fixing the value threshold `τ` gives an
//! ordinary Rips filtration of the sublevel cloud `f⁻¹(-∞, τ]`.

mod barcode;
mod complex;
mod hilbert;

use thiserror::Error;

pub use barcode::{betti, compute_barcode, compute_barcodes, write_barcode_csv, Barcode, Interval};
pub use complex::{build_bifiltration, restrict, Bifiltration, Filtration, Simplex};
pub use hilbert::{hilbert_function, write_hilbert_csv, GridSpec, HilbertFunction};

#[derive(Debug, Error)]
pub enum PersistenceError {
    #[error("point cloud has no per-point values")]
    MissingValues,
    #[error("t_max must be positive and finite, got {0}")]
    BadTMax(f64),
    #[error("maximum simplex dimension must be 1 or 2, got {0}")]
    BadDims(usize),
    #[error("homology degree must be 0 or 1, got {0}")]
    BadDegree(usize),
    #[error("invalid simplex: {0}")]
    BadSimplex(String),
    #[error("filtration is not grade-sorted at position {0}")]
    NotSorted(usize),
    #[error("filtration is not closed under faces at position {0}")]
    NotFaceClosed(usize),
    #[error("grid reaches t = {t_hi} beyond t_max = {t_max}")]
    GridExceedsTMax { t_hi: f64, t_max: f64 },
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PersistenceError>;
