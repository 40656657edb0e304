//! Surface ingestion and the two analysis-ready representations derived from
//! it: a curvature-valued point cloud and an ordered family of level curves.

mod align;
mod contour;
mod curvature;
mod io;
pub mod primitives;
mod sample;
mod spline;
mod stl;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::shape::Curve;
use crate::{Mat3, Vec3};

pub use align::{alignment_transform, landmark_align, RigidTransform};
pub use contour::{extract_level_curves, level_schedule, orient_clockwise};
pub use curvature::{low_pass_filter, mean_curvature, raw_mean_curvature, DEFAULT_CLAMP};
pub use io::{read_curves_csv, read_landmarks_csv, read_xyz, write_curves_csv, write_xyz};
pub use sample::stratified_downsample;
pub use spline::{resample_curve, CurveSampler};
pub use stl::{parse_stl, write_stl_ascii, write_stl_binary, WELD_TOLERANCE};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("STL parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    FaceIndex { face: usize, index: usize, count: usize },
    #[error("face {face} is degenerate (repeated vertex index)")]
    DegenerateFace { face: usize },
    #[error("vertex {0} is isolated (empty one-ring)")]
    IsolatedVertex(usize),
    #[error("scalar field has {got} values but the mesh has {expected} vertices")]
    FieldLength { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("downsample target must be at least 1")]
    ZeroTarget,
    #[error("invalid landmarks: {0}")]
    Landmarks(String),
    #[error("levels outside field range [{min}, {max}]: {levels:?}")]
    LevelOutOfRange { levels: Vec<f64>, min: f64, max: f64 },
    #[error("levels must be strictly increasing")]
    LevelsNotMonotone,
    #[error("no contour with at least 3 points at level {0}")]
    NoContour(f64),
    #[error("curve has zero arc length")]
    ZeroLength,
    #[error("resample count must be at least 3, got {0}")]
    TooFewSamples(usize),
    #[error("{path}:{line}: {message}")]
    Text { path: String, line: usize, message: String },
    #[error(transparent)]
    Shape(#[from] crate::shape::ShapeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MeshError>;

/// Indexed triangle surface with named per-vertex scalar fields.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    fields: BTreeMap<String, Vec<f64>>,
}

impl TriMesh {
    /// Builds a mesh from already-indexed data, validating face indices.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let count = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if !v.iter().all(|c| c.is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            for &index in f {
                if index >= count {
                    return Err(MeshError::FaceIndex { face: fi, index, count });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }
        Ok(Self { vertices, faces, fields: BTreeMap::new() })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.get(name).map(Vec::as_slice)
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.fields.keys().map(String::as_str)
    }

    pub fn set_field(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.vertices.len() {
            return Err(MeshError::FieldLength { expected: self.vertices.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFinite(i));
        }
        self.fields.insert(name.into(), values);
        Ok(())
    }

    /// Applies `x -> rotation * x + translation` to every vertex. Fields are kept.
    pub fn transformed(&self, rotation: &Mat3, translation: &Vec3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| rotation * v + translation).collect(),
            faces: self.faces.clone(),
            fields: self.fields.clone(),
        }
    }

    /// Sorted, deduplicated one-ring neighbours of every vertex.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertices.len()];
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                nbrs[a].push(b);
                nbrs[b].push(a);
            }
        }
        for n in &mut nbrs {
            n.sort_unstable();
            n.dedup();
        }
        nbrs
    }

    /// Flags vertices incident to an edge used by exactly one face.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut edge_use: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *edge_use.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut boundary = vec![false; self.vertices.len()];
        for ((a, b), n) in edge_use {
            if n == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
        boundary
    }

    /// Mean edge length over unique edges.
    pub fn mean_edge_length(&self) -> f64 {
        let nbrs = self.vertex_neighbors();
        let (mut sum, mut count) = (0.0, 0usize);
        for (a, list) in nbrs.iter().enumerate() {
            for &b in list.iter().filter(|&&b| b > a) {
                sum += (self.vertices[a] - self.vertices[b]).norm();
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    }
}

/// Point sample of a surface with an optional scalar value per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    values: Option<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, values: Option<Vec<f64>>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(MeshError::NonFinite(i));
        }
        if let Some(vals) = &values {
            if vals.len() != points.len() {
                return Err(MeshError::FieldLength { expected: points.len(), got: vals.len() });
            }
            if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        Ok(Self { points, values })
    }

    /// Cloud of mesh vertices carrying the named field as values.
    pub fn from_mesh_field(mesh: &TriMesh, field: &[f64]) -> Result<Self> {
        Self::new(mesh.vertices().to_vec(), Some(field.to_vec()))
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Vertex indices of the nose tip and both eyes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Landmarks {
    pub nose_tip: usize,
    pub left_eye: usize,
    pub right_eye: usize,
}

/// Minimum triangle area (mm²) spanned by the three landmarks.
pub const LANDMARK_MIN_AREA: f64 = 1e-9;

impl Landmarks {
    pub fn new(nose_tip: usize, left_eye: usize, right_eye: usize) -> Self {
        Self { nose_tip, left_eye, right_eye }
    }

    /// Checks distinctness, bounds and non-collinearity against `vertices`.
    pub fn validate(&self, vertices: &[Vec3]) -> Result<()> {
        let idx = [self.nose_tip, self.left_eye, self.right_eye];
        if idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2] {
            return Err(MeshError::Landmarks(format!("indices must be distinct, got {idx:?}")));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= vertices.len()) {
            return Err(MeshError::Landmarks(format!(
                "index {bad} out of range for {} vertices",
                vertices.len()
            )));
        }
        let (n, l, r) = (vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]);
        let area = 0.5 * (l - n).cross(&(r - n)).norm();
        if area <= LANDMARK_MIN_AREA {
            return Err(MeshError::Landmarks(format!("landmarks are collinear (area {area:e})")));
        }
        Ok(())
    }
}

/// Level curves of a surface, ordered by level value.
#[derive(Debug, Clone, PartialEq)]
pub struct FacialCurves {
    curves: Vec<Curve>,
    level_values: Vec<f64>,
}

impl FacialCurves {
    pub fn new(curves: Vec<Curve>, level_values: Vec<f64>) -> Result<Self> {
        if curves.len() != level_values.len() {
            return Err(MeshError::FieldLength { expected: curves.len(), got: level_values.len() });
        }
        let increasing = level_values.windows(2).all(|w| w[0] < w[1]);
        let decreasing = level_values.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(MeshError::LevelsNotMonotone);
        }
        Ok(Self { curves, level_values })
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn level_values(&self) -> &[f64] {
        &self.level_values
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Resamples every curve to `m` equidistant points.
    pub fn resampled(&self, m: usize) -> Result<Self> {
        let curves = self.curves.iter().map(|c| resample_curve(c, m)).collect::<Result<Vec<_>>>()?;
        Ok(Self { curves, level_values: self.level_values.clone() })
    }
}
