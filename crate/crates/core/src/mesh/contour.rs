//! Level-set polylines of a per-vertex scalar field.

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;

use super::{FacialCurves, MeshError, Result, TriMesh};
use crate::shape::{Curve, CurveKind};
use crate::{Mat3, Vec3};

/// `k` levels spaced uniformly between the 5th and 95th percentiles of `field`.
pub fn level_schedule(field: &[f64], k: usize) -> Vec<f64> {
    if field.is_empty() || k == 0 {
        return Vec::new();
    }
    let mut sorted = field.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pct = |q: f64| {
        let pos = q * (sorted.len() - 1) as f64;
        let (i, frac) = (pos.floor() as usize, pos.fract());
        let j = (i + 1).min(sorted.len() - 1);
        sorted[i] + frac * (sorted[j] - sorted[i])
    };
    let (lo, hi) = (pct(0.05), pct(0.95));
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect()
}

/// Cuts the mesh at each level, keeps the longest connected component per
/// level and orders its points clockwise (see [`orient_clockwise`]).
///
/// A vertex whose value equals the level counts as above it, so every
/// triangle contributes at most one segment.
pub fn extract_level_curves(mesh: &TriMesh, field: &[f64], levels: &[f64]) -> Result<FacialCurves> {
    if field.len() != mesh.vertex_count() {
        return Err(MeshError::FieldLength { expected: mesh.vertex_count(), got: field.len() });
    }
    if let Some(i) = field.iter().position(|v| !v.is_finite()) {
        return Err(MeshError::NonFinite(i));
    }
    let min = field.iter().copied().fold(f64::INFINITY, f64::min);
    let max = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bad: Vec<f64> = levels.iter().copied().filter(|l| !(*l >= min && *l <= max)).collect();
    if !bad.is_empty() {
        return Err(MeshError::LevelOutOfRange { levels: bad, min, max });
    }
    if !levels.windows(2).all(|w| w[0] < w[1]) {
        return Err(MeshError::LevelsNotMonotone);
    }
    let curves = levels
        .iter()
        .map(|&level| {
            let comps = level_components(mesh, field, level);
            let best = comps
                .into_iter()
                .filter(|c| c.points.len() >= 3)
                .max_by(|a, b| a.length().total_cmp(&b.length()))
                .ok_or(MeshError::NoContour(level))?;
            let curve = Curve::new(best.points, best.kind)?;
            Ok(orient_clockwise(&curve))
        })
        .collect::<Result<Vec<_>>>()?;
    FacialCurves::new(curves, levels.to_vec())
}

pub(crate) struct Component {
    pub points: Vec<Vec3>,
    pub kind: CurveKind,
}

impl Component {
    pub fn length(&self) -> f64 {
        let open: f64 = self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        match self.kind {
            CurveKind::Open => open,
            CurveKind::Closed => open + (self.points[0] - self.points[self.points.len() - 1]).norm(),
        }
    }
}

/// All connected polylines of the level set, in a deterministic order.
pub(crate) fn level_components(mesh: &TriMesh, field: &[f64], level: f64) -> Vec<Component> {
    let above = |i: usize| field[i] >= level;
    let verts = mesh.vertices();
    // crossing point per edge, keyed by (min, max) vertex index
    let mut nodes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut node_pos: Vec<Vec3> = Vec::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut node_for = |a: usize, b: usize, nodes: &mut BTreeMap<(usize, usize), usize>| -> usize {
        let key = (a.min(b), a.max(b));
        *nodes.entry(key).or_insert_with(|| {
            let (lo, hi) = if above(key.0) { (key.1, key.0) } else { key };
            let t = (level - field[lo]) / (field[hi] - field[lo]);
            node_pos.push(verts[lo] + (verts[hi] - verts[lo]) * t);
            node_pos.len() - 1
        })
    };
    for f in mesh.faces() {
        let crossing: Vec<(usize, usize)> = (0..3)
            .map(|k| (f[k], f[(k + 1) % 3]))
            .filter(|&(a, b)| above(a) != above(b))
            .collect();
        if crossing.len() == 2 {
            let n0 = node_for(crossing[0].0, crossing[0].1, &mut nodes);
            let n1 = node_for(crossing[1].0, crossing[1].1, &mut nodes);
            if n0 != n1 {
                segments.push((n0, n1));
            }
        }
    }
    let n = node_pos.len();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &segments {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut visited = vec![false; n];
    let mut out = Vec::new();
    let walk = |start: usize, visited: &mut Vec<bool>| -> (Vec<usize>, bool) {
        let mut path = vec![start];
        visited[start] = true;
        let mut cur = start;
        loop {
            match adj[cur].iter().copied().find(|&m| !visited[m]) {
                Some(next) => {
                    visited[next] = true;
                    path.push(next);
                    cur = next;
                }
                None => break,
            }
        }
        let closed = path.len() > 2 && adj[cur].contains(&start);
        (path, closed)
    };
    // open chains first, from their lowest-numbered end
    for start in 0..n {
        if !visited[start] && adj[start].len() == 1 {
            let (path, _) = walk(start, &mut visited);
            out.push(path_component(&path, &node_pos, CurveKind::Open));
        }
    }
    for start in 0..n {
        if !visited[start] && !adj[start].is_empty() {
            let (path, closed) = walk(start, &mut visited);
            let kind = if closed { CurveKind::Closed } else { CurveKind::Open };
            out.push(path_component(&path, &node_pos, kind));
        }
    }
    out
}

fn path_component(path: &[usize], pos: &[Vec3], kind: CurveKind) -> Component {
    let mut points: Vec<Vec3> = Vec::with_capacity(path.len());
    for &i in path {
        if points.last().is_none_or(|q| (pos[i] - q).norm() > 1e-12) {
            points.push(pos[i]);
        }
    }
    if kind == CurveKind::Closed && points.len() > 1 && (points[0] - points[points.len() - 1]).norm() <= 1e-12 {
        points.pop();
    }
    Component { points, kind }
}

/// Orders the curve clockwise in its best-fit plane, with the plane normal
/// chosen to point along +y. When the enclosed signed area is negligible the
/// curve is oriented so that x increases from first to last point.
pub fn orient_clockwise(curve: &Curve) -> Curve {
    let pts = curve.points();
    let c = curve.centroid();
    let mut cov = Mat3::zeros();
    for p in pts {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let (mut k, mut extent) = (0, 0.0f64);
    for i in 0..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
        extent = extent.max(eig.eigenvalues[i]);
    }
    let mut normal: Vec3 = eig.eigenvectors.column(k).into_owned();
    if normal.y < 0.0 {
        normal = -normal;
    }
    let n = pts.len();
    let signed: f64 = (0..n).map(|i| (pts[i] - c).cross(&(pts[(i + 1) % n] - c)).dot(&normal)).sum();
    let scale = extent / n as f64;
    let reverse = if normal.y.abs() > 1e-9 && signed.abs() > 1e-9 * scale {
        signed > 0.0
    } else {
        pts[n - 1].x < pts[0].x
    };
    if reverse {
        curve.reversed()
    } else {
        curve.clone()
    }
}
