use nalgebra::DMatrix;

use super::geodesic::sphere_angle;
use super::{
    group_action, optimal_reparam, preshape_geodesic_with, procrustes_rotation, project_closed, srv_transform, Curve,
    CurveKind, Reparam, Result, ShapeError, SrvFunction, DEFAULT_PATH_STEPS,
};
use crate::mesh::{CurveSampler, FacialCurves};
use crate::Mat3;

/// Samples per curve after arc-length resampling.
pub const DEFAULT_SAMPLES: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOptions {
    pub samples: usize,
    /// Cap on rotation/reparameterisation rounds.
    pub max_rounds: usize,
    /// Stop once a round improves the distance by less than this.
    pub tolerance: f64,
    /// Starting-point candidates tried for closed curves.
    pub cyclic_seeds: usize,
    /// Segments of the closed-curve geodesic path used for the final length.
    pub path_steps: usize,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, max_rounds: 20, tolerance: 1e-6, cyclic_seeds: 32, path_steps: DEFAULT_PATH_STEPS }
    }
}

/// Optimal alignment found by [`shape_distance`].
///
/// `(optimal_rotation, optimal_reparam)` acts on the second curve's SRV
/// (both curves resampled to the common sample count) to bring it closest
/// to the first.
#[derive(Debug, Clone)]
pub struct ShapeDistanceReport {
    pub d_s: f64,
    pub optimal_rotation: Mat3,
    pub optimal_reparam: Reparam,
    pub dim: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl ShapeDistanceReport {
    /// The rotation as a `dim × dim` matrix.
    pub fn rotation(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.optimal_rotation[(i, j)])
    }
}

/// Elastic shape distance with default options.
pub fn shape_distance(c0: &Curve, c1: &Curve) -> Result<ShapeDistanceReport> {
    shape_distance_with(c0, c1, &ShapeOptions::default())
}

/// Elastic shape distance: preshape geodesic distance minimised over
/// rotations, reparameterisations and (closed curves) starting points.
///
/// The search runs in both directions and keeps the smaller result, so the
/// distance is exactly symmetric.
pub fn shape_distance_with(c0: &Curve, c1: &Curve, opts: &ShapeOptions) -> Result<ShapeDistanceReport> {
    if c0.kind() != c1.kind() {
        return Err(ShapeError::KindMismatch(c0.kind(), c1.kind()));
    }
    if c0.dim() != c1.dim() {
        return Err(ShapeError::DimensionMismatch(c0.dim(), c1.dim()));
    }
    let forward = directed(c0, c1, opts)?;
    let backward = directed(c1, c0, opts)?;
    if backward.d_s < forward.d_s {
        Ok(ShapeDistanceReport {
            optimal_rotation: backward.optimal_rotation.transpose(),
            optimal_reparam: backward.optimal_reparam.inverse(),
            ..backward
        })
    } else {
        Ok(forward)
    }
}

struct Fit {
    d: f64,
    rotation: Mat3,
    gamma: Reparam,
    rounds: usize,
    converged: bool,
}

fn to_srv(curve: &Curve) -> Result<SrvFunction> {
    let q = srv_transform(curve)?;
    match curve.kind() {
        CurveKind::Open => Ok(q),
        CurveKind::Closed => project_closed(&q),
    }
}

fn resample_err(e: crate::mesh::MeshError) -> ShapeError {
    match e {
        crate::mesh::MeshError::Shape(inner) => inner,
        other => ShapeError::Resample(other.to_string()),
    }
}

fn directed(c0: &Curve, c1: &Curve, opts: &ShapeOptions) -> Result<ShapeDistanceReport> {
    let n = opts.samples;
    let s0 = CurveSampler::new(c0).map_err(resample_err)?;
    let s1 = CurveSampler::new(c1).map_err(resample_err)?;
    let q0 = to_srv(&s0.sample(n, 0.0).map_err(resample_err)?)?;
    let q1_at = |shift: f64| -> Result<SrvFunction> { to_srv(&s1.sample(n, shift).map_err(resample_err)?) };

    let (fit, q1, shift) = match c0.kind() {
        CurveKind::Open => {
            let q1 = q1_at(0.0)?;
            (fit(&q0, &q1, opts.max_rounds, opts.tolerance)?, q1, 0.0)
        }
        CurveKind::Closed => {
            let score = |shift: f64| -> Result<f64> { Ok(fit(&q0, &q1_at(shift)?, 1, opts.tolerance)?.d) };
            let seeds = opts.cyclic_seeds.max(1);
            let mut best = (f64::INFINITY, 0.0);
            for k in 0..seeds {
                let s = k as f64 / seeds as f64;
                let d = score(s)?;
                if d < best.0 {
                    best = (d, s);
                }
            }
            let shift = golden_section(score, best.1 - 1.0 / seeds as f64, best.1 + 1.0 / seeds as f64, best)?;
            let shift = shift.rem_euclid(1.0);
            let q1 = q1_at(shift)?;
            (fit(&q0, &q1, opts.max_rounds, opts.tolerance)?, q1, shift)
        }
    };

    let d_s = match c0.kind() {
        CurveKind::Open => fit.d,
        CurveKind::Closed => {
            let aligned = project_closed(&group_action(&q1, &fit.rotation, &fit.gamma)?)?;
            preshape_geodesic_with(&q0, &aligned, opts.path_steps)?.length
        }
    };
    Ok(ShapeDistanceReport {
        d_s: d_s.clamp(0.0, std::f64::consts::PI),
        optimal_rotation: fit.rotation,
        optimal_reparam: fit.gamma.shifted(shift),
        dim: c0.dim(),
        iterations: fit.rounds,
        converged: fit.converged,
    })
}

/// Minimises `f` on `[lo, hi]`, never returning worse than `start`.
fn golden_section(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, start: (f64, f64)) -> Result<f64> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut best = start;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..14 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        }
        for (d, x) in [(f1, x1), (f2, x2)] {
            if d < best.0 {
                best = (d, x);
            }
        }
    }
    Ok(best.1)
}

/// Alternates Procrustes rotation and DP reparameterisation, keeping the
/// best state seen.
fn fit(q0: &SrvFunction, q1: &SrvFunction, max_rounds: usize, tolerance: f64) -> Result<Fit> {
    let mut gamma = Reparam::identity();
    let mut best: Option<Fit> = None;
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut rounds = 0;
    for _ in 0..max_rounds.max(1) {
        rounds += 1;
        let warped = group_action(q1, &Mat3::identity(), &gamma)?;
        let rotation = procrustes_rotation(q0, &warped)?;
        let d_rot = sphere_angle(q0, &warped.map_values(|v| rotation * v))?;
        consider(&mut best, d_rot, rotation, &gamma);
        let next = optimal_reparam(q0, &q1.map_values(|v| rotation * v))?;
        let d = sphere_angle(q0, &group_action(q1, &rotation, &next)?)?;
        consider(&mut best, d, rotation, &next);
        gamma = next;
        let current = best.as_ref().map_or(f64::INFINITY, |b| b.d);
        if prev - current < tolerance {
            converged = true;
            break;
        }
        prev = current;
    }
    let mut out = best.expect("at least one round");
    out.rounds = rounds;
    out.converged = converged;
    Ok(out)
}

fn consider(best: &mut Option<Fit>, d: f64, rotation: Mat3, gamma: &Reparam) {
    if best.as_ref().is_none_or(|b| d < b.d) {
        *best = Some(Fit { d, rotation, gamma: gamma.clone(), rounds: 0, converged: false });
    }
}

/// Per-curve shape distances between two index-aligned curve families.
pub fn curve_distances(f0: &FacialCurves, f1: &FacialCurves, opts: &ShapeOptions) -> Result<Vec<f64>> {
    if f0.len() != f1.len() {
        return Err(ShapeError::CurveCountMismatch(f0.len(), f1.len()));
    }
    f0.curves().iter().zip(f1.curves()).map(|(a, b)| Ok(shape_distance_with(a, b, opts)?.d_s)).collect()
}

/// Face distance: the product of the per-curve shape distances.
///
/// The product vanishes as soon as any single pair of curves matches, and
/// it is not a metric; it is kept in this form deliberately.
pub fn face_distance(f0: &FacialCurves, f1: &FacialCurves) -> Result<f64> {
    face_distance_with(f0, f1, &ShapeOptions::default())
}

pub fn face_distance_with(f0: &FacialCurves, f1: &FacialCurves, opts: &ShapeOptions) -> Result<f64> {
    Ok(curve_distances(f0, f1, opts)?.into_iter().product())
}
