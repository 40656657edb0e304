//! Discrete mean curvature from the cotangent Laplacian.

use super::{MeshError, Result, TriMesh};
use crate::Vec3;

/// Default curvature clamp, matching a symmetric [-0.5, 0.5] colour range.
pub const DEFAULT_CLAMP: f64 = 0.5;

fn cot(a: &Vec3, b: &Vec3) -> f64 {
    let s = a.cross(b).norm();
    if s == 0.0 {
        0.0
    } else {
        a.dot(b) / s
    }
}

/// Signed discrete mean curvature per vertex, before clamping.
///
/// Interior vertices use `H = ±|K|/2` with `K = (1/2A) Σ (cot α + cot β)(x_i - x_j)`
/// over the mixed Voronoi area `A`; the sign follows the area-weighted vertex
/// normal. Boundary vertices take the mean of their interior neighbours.
pub fn raw_mean_curvature(mesh: &TriMesh) -> Result<Vec<f64>> {
    let v = mesh.vertices();
    let n = v.len();
    let mut lap = vec![Vec3::zeros(); n];
    let mut area = vec![0.0; n];
    let mut normal = vec![Vec3::zeros(); n];
    let mut used = vec![false; n];

    for f in mesh.faces() {
        let p = [v[f[0]], v[f[1]], v[f[2]]];
        let fnormal = (p[1] - p[0]).cross(&(p[2] - p[0]));
        let tri_area = 0.5 * fnormal.norm();
        let mut cots = [0.0; 3];
        let mut obtuse = None;
        for k in 0..3 {
            let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
            let (e1, e2) = (b - a, c - a);
            cots[k] = cot(&e1, &e2);
            if e1.dot(&e2) < 0.0 {
                obtuse = Some(k);
            }
        }
        for k in 0..3 {
            let (ia, ib, ic) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
            used[ia] = true;
            normal[ia] += fnormal;
            // edge (b, c) is opposite corner a
            let w = cots[k];
            lap[ib] += w * (v[ib] - v[ic]);
            lap[ic] += w * (v[ic] - v[ib]);
            area[ia] += match obtuse {
                None => {
                    let (b, c) = (p[(k + 1) % 3], p[(k + 2) % 3]);
                    let a = p[k];
                    ((a - b).norm_squared() * cots[(k + 2) % 3] + (a - c).norm_squared() * cots[(k + 1) % 3]) / 8.0
                }
                Some(o) if o == k => tri_area / 2.0,
                Some(_) => tri_area / 4.0,
            };
        }
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(MeshError::IsolatedVertex(i));
    }

    let boundary = mesh.boundary_vertices();
    let mut h: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if boundary[i] || area[i] <= 0.0 {
                return None;
            }
            let k = lap[i] / (2.0 * area[i]);
            let mag = 0.5 * k.norm();
            Some(if k.dot(&normal[i]) < 0.0 { -mag } else { mag })
        })
        .collect();

    // Boundary vertices: mean of already-known neighbours, propagated inward-out.
    let nbrs = mesh.vertex_neighbors();
    loop {
        let fills: Vec<(usize, f64)> = (0..n)
            .filter(|&i| h[i].is_none())
            .filter_map(|i| {
                let known: Vec<f64> = nbrs[i].iter().filter_map(|&j| h[j]).collect();
                (!known.is_empty()).then(|| (i, known.iter().sum::<f64>() / known.len() as f64))
            })
            .collect();
        if fills.is_empty() {
            break;
        }
        for (i, val) in fills {
            h[i] = Some(val);
        }
    }
    Ok(h.into_iter().map(|x| x.unwrap_or(0.0)).collect())
}

/// Mean curvature clamped to `[-clamp, clamp]`.
pub fn mean_curvature(mesh: &TriMesh, clamp: f64) -> Result<Vec<f64>> {
    let clamp = clamp.abs();
    Ok(raw_mean_curvature(mesh)?.into_iter().map(|h| h.clamp(-clamp, clamp)).collect())
}

/// Clamps `field` and applies one pass of uniform one-ring Laplacian smoothing
/// (step 1/2). The result stays within `[-clamp, clamp]`.
pub fn low_pass_filter(mesh: &TriMesh, field: &[f64], clamp: f64) -> Result<Vec<f64>> {
    if field.len() != mesh.vertex_count() {
        return Err(MeshError::FieldLength { expected: mesh.vertex_count(), got: field.len() });
    }
    let clamp = clamp.abs();
    let clamped: Vec<f64> = field.iter().map(|x| x.clamp(-clamp, clamp)).collect();
    let nbrs = mesh.vertex_neighbors();
    Ok(clamped
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if nbrs[i].is_empty() {
                return x;
            }
            let mean = nbrs[i].iter().map(|&j| clamped[j]).sum::<f64>() / nbrs[i].len() as f64;
            (x + 0.5 * (mean - x)).clamp(-clamp, clamp)
        })
        .collect())
}
