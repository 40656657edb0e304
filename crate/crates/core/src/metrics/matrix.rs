use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::{l2_distance, sublevel_hausdorff, MetricError, Result};
use crate::mesh::FacialCurves;
use crate::persistence::HilbertFunction;
use crate::shape::{face_distance_with, ShapeOptions};

/// Symmetric matrix of pairwise distances with subject ids and group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    labels: Vec<String>,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// `entries` in row-major order; must be symmetric, finite, nonnegative
    /// with a zero diagonal.
    pub fn new(ids: Vec<String>, labels: Vec<String>, entries: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if labels.len() != n || entries.len() != n * n {
            return Err(MetricError::LengthMismatch { ids: n, labels: labels.len(), n: entries.len() });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(MetricError::Invalid(format!("diagonal entry {i} is {}", entries[i * n + i])));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(MetricError::Invalid(format!("entry ({i},{j}) is {v}")));
                }
                if v != entries[j * n + i] {
                    return Err(MetricError::Invalid(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
            }
        }
        Ok(Self { ids, labels, entries })
    }

    /// Builds from the strict upper triangle, read row by row.
    pub fn from_upper(ids: Vec<String>, labels: Vec<String>, upper: &[f64]) -> Result<Self> {
        let n = ids.len();
        let mut entries = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let v = *upper.get(k).ok_or(MetricError::Invalid("upper triangle too short".into()))?;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
                k += 1;
            }
        }
        Self::new(ids, labels, entries)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.len() + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Simultaneous row/column permutation: row `k` of the result is row `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.len();
        let mut entries = vec![0.0; n * n];
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                entries[a * n + b] = self.get(i, j);
            }
        }
        Self {
            ids: order.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            entries,
        }
    }

    /// Stable reordering with `no-risk` subjects first, then `risk`, then any
    /// other labels alphabetically.
    pub fn sorted_by_group(&self) -> Self {
        let rank = |l: &str| match l {
            "no-risk" => (0, String::new()),
            "risk" => (1, String::new()),
            other => (2, other.to_string()),
        };
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| rank(&self.labels[i]));
        self.permuted(&order)
    }

    /// CSV: `id,<ids>`, then `label,<labels>`, then one row per subject with
    /// 17 significant digits so values round-trip exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,{}", self.ids.join(","))?;
        writeln!(w, "label,{}", self.labels.join(","))?;
        for i in 0..self.len() {
            write!(w, "{}", self.ids[i])?;
            for j in 0..self.len() {
                write!(w, ",{:.16e}", self.get(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = |line: usize, key: Option<&str>| -> Result<Vec<String>> {
            let text = lines.next().ok_or(MetricError::Csv { line, message: "unexpected end of file".into() })??;
            let mut cells: Vec<String> = text.split(',').map(str::to_string).collect();
            if let Some(k) = key {
                if cells.first().map(String::as_str) != Some(k) {
                    return Err(MetricError::Csv { line, message: format!("expected row starting with `{k}`") });
                }
            }
            cells.remove(0);
            Ok(cells)
        };
        let ids = next(1, Some("id"))?;
        let labels = next(2, Some("label"))?;
        let n = ids.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            let line = i + 3;
            let row = next(line, Some(&ids[i]))?;
            if row.len() != n {
                return Err(MetricError::Csv { line, message: format!("expected {n} values, got {}", row.len()) });
            }
            for cell in row {
                entries.push(
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| MetricError::Csv { line, message: format!("`{cell}`: {e}") })?,
                );
            }
        }
        Self::new(ids, labels, entries)
    }
}

/// Per-subject input to [`pairwise_matrix`].
#[derive(Debug, Clone)]
pub enum Descriptor {
    Hilbert(HilbertFunction),
    Curves(FacialCurves),
}

impl Descriptor {
    fn kind(&self) -> &'static str {
        match self {
            Descriptor::Hilbert(_) => "hilbert",
            Descriptor::Curves(_) => "curves",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    /// L² distance between Hilbert functions.
    L2,
    /// Sublevel Hausdorff distance between Hilbert functions (integer λ grid).
    SublevelHausdorff,
    /// Product of elastic shape distances between curve families.
    Geodesic(ShapeOptions),
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::L2 => "de",
            Metric::SublevelHausdorff => "dH",
            Metric::Geodesic(_) => "dg",
        }
    }
}

/// Distance matrix over all unordered pairs, evaluated in parallel.
pub fn pairwise_matrix(
    descriptors: &[Descriptor],
    metric: &Metric,
    ids: Vec<String>,
    labels: Vec<String>,
) -> Result<DistanceMatrix> {
    let n = descriptors.len();
    if n < 2 {
        return Err(MetricError::TooFewDescriptors(n));
    }
    if ids.len() != n || labels.len() != n {
        return Err(MetricError::LengthMismatch { ids: ids.len(), labels: labels.len(), n });
    }
    let kind = descriptors[0].kind();
    if descriptors.iter().any(|d| d.kind() != kind) {
        return Err(MetricError::Heterogeneous);
    }
    let applicable = matches!(
        (metric, &descriptors[0]),
        (Metric::L2 | Metric::SublevelHausdorff, Descriptor::Hilbert(_)) | (Metric::Geodesic(_), Descriptor::Curves(_))
    );
    if !applicable {
        return Err(MetricError::NotApplicable { metric: metric.name(), kind });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, j)| match (&descriptors[i], &descriptors[j], metric) {
            (Descriptor::Hilbert(a), Descriptor::Hilbert(b), Metric::L2) => l2_distance(a, b),
            (Descriptor::Hilbert(a), Descriptor::Hilbert(b), Metric::SublevelHausdorff) => {
                sublevel_hausdorff(a, b, None)
            }
            (Descriptor::Curves(a), Descriptor::Curves(b), Metric::Geodesic(opts)) => face_distance_with(a, b, opts)
                .map_err(|source| MetricError::Shape { a: ids[i].clone(), b: ids[j].clone(), source }),
            _ => unreachable!("checked above"),
        })
        .collect::<Result<Vec<f64>>>()?;
    DistanceMatrix::from_upper(ids, labels, &upper)
}
