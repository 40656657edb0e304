use std::cmp::Ordering;

use super::{PersistenceError, Result};
use crate::mesh::PointCloud;

/// A vertex, edge or triangle with its two appearance grades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    verts: [usize; 3],
    dim: u8,
    /// Rips scale: largest pairwise distance among the vertices.
    pub t: f64,
    /// Value grade: largest vertex value.
    pub tau: f64,
}

impl Simplex {
    /// `vertices` must be strictly increasing, with 1 to 3 entries.
    pub fn new(vertices: &[usize], t: f64, tau: f64) -> Result<Self> {
        if vertices.is_empty() || vertices.len() > 3 {
            return Err(PersistenceError::BadSimplex(format!("{} vertices", vertices.len())));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(PersistenceError::BadSimplex(format!("vertices {vertices:?} not strictly increasing")));
        }
        let mut verts = [0; 3];
        verts[..vertices.len()].copy_from_slice(vertices);
        Ok(Self { verts, dim: (vertices.len() - 1) as u8, t, tau })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.verts[..=self.dim as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Codimension-one faces (empty for a vertex).
    pub(crate) fn facets(&self) -> impl Iterator<Item = ([usize; 3], u8)> + '_ {
        let d = self.dim as usize;
        (0..if d == 0 { 0 } else { d + 1 }).map(move |skip| {
            let mut f = [0; 3];
            let mut k = 0;
            for (i, &v) in self.vertices().iter().enumerate() {
                if i != skip {
                    f[k] = v;
                    k += 1;
                }
            }
            (f, self.dim - 1)
        })
    }

    pub(crate) fn key(&self) -> ([usize; 3], u8) {
        (self.verts, self.dim)
    }

    /// Filtration order: scale, then dimension, then vertices.
    pub(crate) fn order(&self, other: &Self) -> Ordering {
        self.t
            .total_cmp(&other.t)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// All Rips simplices up to a diameter bound, graded by scale and value.
#[derive(Debug, Clone)]
pub struct Bifiltration {
    simplices: Vec<Simplex>,
    n_points: usize,
    t_max: f64,
    value_range: (f64, f64),
}

impl Bifiltration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.value_range
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

/// Rips bifiltration of `cloud` with simplices of dimension ≤ `dims` and
/// diameter ≤ `t_max`.
pub fn build_bifiltration(cloud: &PointCloud, t_max: f64, dims: usize) -> Result<Bifiltration> {
    let values = cloud.values().ok_or(PersistenceError::MissingValues)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(PersistenceError::BadTMax(t_max));
    }
    if !(1..=2).contains(&dims) {
        return Err(PersistenceError::BadDims(dims));
    }
    let pts = cloud.points();
    let n = pts.len();
    let mut simplices: Vec<Simplex> = (0..n).map(|i| Simplex { verts: [i, 0, 0], dim: 0, t: 0.0, tau: values[i] }).collect();
    // forward neighbours with distances, per vertex
    let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let d = (pts[i] - pts[j]).norm();
            if d <= t_max {
                upper[i].push((j, d));
                simplices.push(Simplex { verts: [i, j, 0], dim: 1, t: d, tau: values[i].max(values[j]) });
            }
        }
    }
    if dims == 2 {
        for i in 0..n {
            for (a, &(j, dij)) in upper[i].iter().enumerate() {
                // both lists are sorted by neighbour index
                let (mut p, mut q) = (a + 1, 0);
                let (ri, rj) = (&upper[i], &upper[j]);
                while p < ri.len() && q < rj.len() {
                    match ri[p].0.cmp(&rj[q].0) {
                        Ordering::Less => p += 1,
                        Ordering::Greater => q += 1,
                        Ordering::Equal => {
                            let k = ri[p].0;
                            let t = dij.max(ri[p].1).max(rj[q].1);
                            let tau = values[i].max(values[j]).max(values[k]);
                            simplices.push(Simplex { verts: [i, j, k], dim: 2, t, tau });
                            p += 1;
                            q += 1;
                        }
                    }
                }
            }
        }
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Bifiltration { simplices, n_points: n, t_max, value_range: (lo, hi) })
}

/// One-parameter filtration: simplices in non-decreasing scale order.
#[derive(Debug, Clone, Default)]
pub struct Filtration {
    simplices: Vec<Simplex>,
}

impl Filtration {
    /// Wraps simplices as given; ordering and face closure are checked when
    /// a barcode is computed.
    pub fn new(simplices: Vec<Simplex>) -> Self {
        Self { simplices }
    }

    /// Sorts `simplices` into filtration order.
    pub fn sorted(mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_by(Simplex::order);
        Self { simplices }
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

/// Simplices whose value grade is at most `tau`, in filtration order.
pub fn restrict(bifilt: &Bifiltration, tau: f64) -> Filtration {
    Filtration::sorted(bifilt.simplices.iter().filter(|s| s.tau <= tau).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;

    fn cloud(points: Vec<Vec3>, values: Vec<f64>) -> PointCloud {
        PointCloud::new(points, Some(values)).unwrap()
    }

    #[test]
    fn edge_grade() {
        let bf = build_bifiltration(&cloud(vec![Vec3::zeros(), Vec3::new(0.0, 2.0, 0.0)], vec![0.3, -1.0]), 5.0, 1).unwrap();
        let e = bf.simplices().iter().find(|s| s.dim() == 1).unwrap();
        assert_eq!(e.vertices(), &[0, 1]);
        assert_eq!((e.t, e.tau), (2.0, 0.3));
    }

    #[test]
    fn triangle_grade_is_side() {
        let s = 1.7;
        let pts = vec![Vec3::zeros(), Vec3::new(s, 0.0, 0.0), Vec3::new(s / 2.0, s * 3f64.sqrt() / 2.0, 0.0)];
        let bf = build_bifiltration(&cloud(pts, vec![0.0; 3]), 2.0, 2).unwrap();
        let tri = bf.simplices().iter().find(|s| s.dim() == 2).unwrap();
        assert!((tri.t - s).abs() < 1e-12);
    }

    #[test]
    fn missing_values() {
        let c = PointCloud::new(vec![Vec3::zeros()], None).unwrap();
        assert!(matches!(build_bifiltration(&c, 1.0, 1), Err(PersistenceError::MissingValues)));
    }

    #[test]
    fn restrict_extremes() {
        let pts = (0..6).map(|i| Vec3::new(i as f64, (i * i) as f64 * 0.1, 0.0)).collect();
        let bf = build_bifiltration(&cloud(pts, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]), 3.0, 2).unwrap();
        assert!(restrict(&bf, -1.0).is_empty());
        let all = restrict(&bf, 5.0);
        assert_eq!(all.len(), bf.simplices().len());
        assert!(all.simplices().windows(2).all(|w| w[0].order(&w[1]) != Ordering::Greater));
    }
}
