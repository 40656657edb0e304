use super::{Result, ShapeError};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    Open,
    Closed,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Open => "open",
            CurveKind::Closed => "closed",
        }
    }
}

/// Uniform-parameter samples of a curve in R² or R³.
///
/// Planar curves are stored with `z = 0`. Closed curves never repeat their
/// first point at the end; a trailing duplicate is dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    points: Vec<Vec3>,
    dim: usize,
    kind: CurveKind,
}

impl Curve {
    pub fn new(mut points: Vec<Vec3>, kind: CurveKind) -> Result<Self> {
        if kind == CurveKind::Closed && points.len() > 1 && points[0] == points[points.len() - 1] {
            points.pop();
        }
        if points.len() < 3 {
            return Err(ShapeError::TooFewPoints(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(ShapeError::NonFinite(i));
        }
        Ok(Self { points, dim: 3, kind })
    }

    pub fn new_2d(points: &[[f64; 2]], kind: CurveKind) -> Result<Self> {
        let mut c = Self::new(points.iter().map(|p| Vec3::new(p[0], p[1], 0.0)).collect(), kind)?;
        c.dim = 2;
        Ok(c)
    }

    /// Skips validation; used where points are produced internally.
    pub(crate) fn new_unchecked(points: Vec<Vec3>, kind: CurveKind, dim: usize) -> Self {
        Self { points, dim, kind }
    }

    /// Same curve with new samples; keeps dimension and kind.
    pub(crate) fn with_points(&self, points: Vec<Vec3>) -> Result<Self> {
        let mut c = Self::new(points, self.kind)?;
        c.dim = self.dim;
        if self.dim == 2 {
            for p in &mut c.points {
                p.z = 0.0;
            }
        }
        Ok(c)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Polyline length, including the closing segment for closed curves.
    pub fn arc_length(&self) -> f64 {
        let open: f64 = self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        match self.kind {
            CurveKind::Open => open,
            CurveKind::Closed => open + (self.points[0] - self.points[self.points.len() - 1]).norm(),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        self.points.iter().sum::<Vec3>() / self.points.len() as f64
    }

    pub fn reversed(&self) -> Self {
        let mut c = self.clone();
        c.points.reverse();
        c
    }
}
