use std::io::Write;

use rayon::prelude::*;

use super::{compute_barcode, restrict, Bifiltration, PersistenceError, Result};

/// Rectangular lattice of `n_t × n_tau` cells over `[t_lo, t_hi] × [tau_lo, tau_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    pub n_t: usize,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub n_tau: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { t_lo: 0.0, t_hi: 40.0, n_t: 20, tau_lo: -0.5, tau_hi: 0.5, n_tau: 20 }
    }
}

impl GridSpec {
    pub fn new(t: (f64, f64), n_t: usize, tau: (f64, f64), n_tau: usize) -> Result<Self> {
        let g = Self { t_lo: t.0, t_hi: t.1, n_t, tau_lo: tau.0, tau_hi: tau.1, n_tau };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t_lo, self.t_hi, self.tau_lo, self.tau_hi].iter().all(|v| v.is_finite());
        if !finite || self.n_t == 0 || self.n_tau == 0 || self.t_hi <= self.t_lo || self.tau_hi <= self.tau_lo {
            return Err(PersistenceError::BadGrid(format!("{self:?}")));
        }
        if self.t_lo < 0.0 {
            return Err(PersistenceError::BadGrid(format!("negative scale {}", self.t_lo)));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        (self.t_hi - self.t_lo) / self.n_t as f64
    }

    pub fn dtau(&self) -> f64 {
        (self.tau_hi - self.tau_lo) / self.n_tau as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dt() * self.dtau()
    }

    /// Lower-left scale of row `i`.
    pub fn t_grade(&self, i: usize) -> f64 {
        self.t_lo + i as f64 * self.dt()
    }

    /// Lower-left value of column `j`.
    pub fn tau_grade(&self, j: usize) -> f64 {
        self.tau_lo + j as f64 * self.dtau()
    }

    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.t_grade(i) + 0.5 * self.dt(), self.tau_grade(j) + 0.5 * self.dtau()]
    }

    /// Diagonal of the parameter rectangle.
    pub fn diameter(&self) -> f64 {
        (self.t_hi - self.t_lo).hypot(self.tau_hi - self.tau_lo)
    }

    pub fn cells(&self) -> usize {
        self.n_t * self.n_tau
    }
}

/// Betti numbers on a grid: `value(i, j) = β_p` at grade `(t_grade(i), tau_grade(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertFunction {
    pub degree: usize,
    grid: GridSpec,
    values: Vec<u32>,
}

impl HilbertFunction {
    /// `values` in row-major order (scale rows, value columns).
    pub fn new(degree: usize, grid: GridSpec, values: Vec<u32>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.cells() {
            return Err(PersistenceError::BadGrid(format!("{} values for {} cells", values.len(), grid.cells())));
        }
        Ok(Self { degree, grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.values[i * self.grid.n_tau + j]
    }

    pub fn max_value(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(0)
    }
}

/// Hilbert function of degree `p`, one barcode per value column.
pub fn hilbert_function(bifilt: &Bifiltration, p: usize, grid: &GridSpec) -> Result<HilbertFunction> {
    grid.validate()?;
    if p > 1 {
        return Err(PersistenceError::BadDegree(p));
    }
    let top = grid.t_grade(grid.n_t - 1);
    if top > bifilt.t_max() * (1.0 + 1e-12) || grid.t_hi > bifilt.t_max() * (1.0 + 1e-12) {
        return Err(PersistenceError::GridExceedsTMax { t_hi: grid.t_hi, t_max: bifilt.t_max() });
    }
    let columns: Vec<Vec<u32>> = (0..grid.n_tau)
        .into_par_iter()
        .map(|j| {
            let bc = compute_barcode(&restrict(bifilt, grid.tau_grade(j)), p)?;
            Ok((0..grid.n_t).map(|i| bc.betti_at(grid.t_grade(i)) as u32).collect())
        })
        .collect::<Result<_>>()?;
    let values = (0..grid.n_t).flat_map(|i| columns.iter().map(move |c| c[i])).collect();
    HilbertFunction::new(p, *grid, values)
}

/// CSV grid: header row of value grades, then one row per scale grade.
pub fn write_hilbert_csv<W: Write>(mut w: W, h: &HilbertFunction) -> std::io::Result<()> {
    let g = h.grid();
    write!(w, "t\\tau")?;
    for j in 0..g.n_tau {
        write!(w, ",{:?}", g.tau_grade(j))?;
    }
    writeln!(w)?;
    for i in 0..g.n_t {
        write!(w, "{:?}", g.t_grade(i))?;
        for j in 0..g.n_tau {
            write!(w, ",{}", h.get(i, j))?;
        }
        writeln!(w)?;
    }
    Ok(())
}
