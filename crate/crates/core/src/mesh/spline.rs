//! Cubic-spline arc-length resampling of curves.

use super::{MeshError, Result};
use crate::shape::{Curve, CurveKind};
use crate::Vec3;

// 8-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Interpolating cubic spline through a curve's samples (chord-length
/// parameterisation; natural ends for open curves, periodic for closed ones)
/// with an arc-length table for equidistant sampling.
#[derive(Debug, Clone)]
pub struct CurveSampler {
    template: Curve,
    knots: Vec<Vec3>,
    second: Vec<Vec3>,
    h: Vec<f64>,
    cumulative: Vec<f64>,
}

impl CurveSampler {
    pub fn new(curve: &Curve) -> Result<Self> {
        let closed = curve.kind() == CurveKind::Closed;
        let mut knots: Vec<Vec3> = Vec::with_capacity(curve.len());
        for p in curve.points() {
            if knots.last().is_none_or(|q: &Vec3| (p - q).norm() > 0.0) {
                knots.push(*p);
            }
        }
        if closed && knots.len() > 1 && knots[0] == knots[knots.len() - 1] {
            knots.pop();
        }
        if knots.len() < 2 || (closed && knots.len() < 3) {
            return Err(MeshError::ZeroLength);
        }
        let n = knots.len();
        let segs = if closed { n } else { n - 1 };
        let h: Vec<f64> = (0..segs).map(|i| (knots[(i + 1) % n] - knots[i]).norm()).collect();
        let second = if closed { periodic_second_derivatives(&knots, &h) } else { natural_second_derivatives(&knots, &h) };
        let mut sampler = Self { template: curve.clone(), knots, second, h, cumulative: Vec::new() };
        let mut acc = 0.0;
        sampler.cumulative.push(0.0);
        for i in 0..segs {
            acc += sampler.partial_length(i, sampler.h[i]);
            sampler.cumulative.push(acc);
        }
        if !(acc > 0.0) {
            return Err(MeshError::ZeroLength);
        }
        Ok(sampler)
    }

    /// Total spline arc length.
    pub fn arc_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn segment_coeffs(&self, i: usize) -> (Vec3, Vec3, Vec3, Vec3, f64) {
        let n = self.knots.len();
        let j = (i + 1) % n;
        (self.knots[i], self.knots[j], self.second[i], self.second[j], self.h[i])
    }

    fn eval(&self, i: usize, u: f64) -> Vec3 {
        let (y0, y1, m0, m1, h) = self.segment_coeffs(i);
        let v = h - u;
        m0 * (v * v * v / (6.0 * h)) + m1 * (u * u * u / (6.0 * h)) + (y0 / h - m0 * (h / 6.0)) * v + (y1 / h - m1 * (h / 6.0)) * u
    }

    fn speed(&self, i: usize, u: f64) -> f64 {
        let (y0, y1, m0, m1, h) = self.segment_coeffs(i);
        let v = h - u;
        let d = -m0 * (v * v / (2.0 * h)) + m1 * (u * u / (2.0 * h)) - (y0 / h - m0 * (h / 6.0)) + (y1 / h - m1 * (h / 6.0));
        d.norm()
    }

    /// Arc length of segment `i` from its start to parameter `u`.
    fn partial_length(&self, i: usize, u: f64) -> f64 {
        let half = u / 2.0;
        let mut total = 0.0;
        for start in [0.0, half] {
            let mid = start + half / 2.0;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                total += w * self.speed(i, mid + x * half / 2.0);
            }
        }
        total * half / 2.0
    }

    /// Point at arc length `s` (taken modulo the length for closed curves).
    pub fn point_at(&self, s: f64) -> Vec3 {
        let total = self.arc_length();
        let s = if self.template.kind() == CurveKind::Closed { s.rem_euclid(total) } else { s.clamp(0.0, total) };
        let segs = self.h.len();
        let i = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(k) => k.min(segs - 1),
            Err(k) => (k - 1).min(segs - 1),
        };
        let target = s - self.cumulative[i];
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let h = self.h[i];
        if target <= 0.0 {
            return self.eval(i, 0.0);
        }
        if target >= seg_len {
            return self.eval(i, h);
        }
        let (mut lo, mut hi) = (0.0, h);
        let mut u = h * target / seg_len;
        for _ in 0..60 {
            let f = self.partial_length(i, u) - target;
            if f.abs() <= 1e-14 * total {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let sp = self.speed(i, u);
            let newton = if sp > 0.0 { u - f / sp } else { f64::NAN };
            u = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        self.eval(i, u)
    }

    /// `m` points equally spaced in arc length. Open curves keep both
    /// endpoints; closed curves start at arc fraction `start` of the length.
    pub fn sample(&self, m: usize, start: f64) -> Result<Curve> {
        if m < 3 {
            return Err(MeshError::TooFewSamples(m));
        }
        let total = self.arc_length();
        let points: Vec<Vec3> = match self.template.kind() {
            CurveKind::Open => (0..m)
                .map(|k| match k {
                    0 => self.knots[0],
                    _ if k == m - 1 => self.knots[self.knots.len() - 1],
                    _ => self.point_at(total * k as f64 / (m - 1) as f64),
                })
                .collect(),
            CurveKind::Closed => (0..m).map(|k| self.point_at(total * (start + k as f64 / m as f64))).collect(),
        };
        Ok(self.template.with_points(points)?)
    }
}

/// Resamples `curve` to `m` points equidistant in spline arc length.
pub fn resample_curve(curve: &Curve, m: usize) -> Result<Curve> {
    if m < 3 {
        return Err(MeshError::TooFewSamples(m));
    }
    CurveSampler::new(curve)?.sample(m, 0.0)
}

fn rhs(knots: &[Vec3], i: usize, prev: usize, next: usize, hp: f64, hn: f64) -> Vec3 {
    ((knots[next] - knots[i]) / hn - (knots[i] - knots[prev]) / hp) * 6.0
}

fn natural_second_derivatives(knots: &[Vec3], h: &[f64]) -> Vec<Vec3> {
    let n = knots.len();
    let mut m = vec![Vec3::zeros(); n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior unknowns 1..n-1
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut upper = vec![0.0; k];
    let mut d = vec![Vec3::zeros(); k];
    for r in 0..k {
        let i = r + 1;
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        upper[r] = h[i];
        d[r] = rhs(knots, i, i - 1, i + 1, h[i - 1], h[i]);
    }
    for r in 1..k {
        let w = h[r] / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        let prev = d[r - 1];
        d[r] -= prev * w;
    }
    m[k] = d[k - 1] / diag[k - 1];
    for r in (0..k - 1).rev() {
        m[r + 1] = (d[r] - m[r + 2] * upper[r]) / diag[r];
    }
    m
}

fn periodic_second_derivatives(knots: &[Vec3], h: &[f64]) -> Vec<Vec3> {
    let n = knots.len();
    // row i: h[i-1] M[i-1] + 2(h[i-1]+h[i]) M[i] + h[i] M[i+1] = rhs (cyclic)
    let sub: Vec<f64> = (0..n).map(|i| h[(i + n - 1) % n]).collect();
    let sup: Vec<f64> = (0..n).map(|i| h[i]).collect();
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * (sub[i] + sup[i])).collect();
    let d: Vec<Vec3> = (0..n).map(|i| rhs(knots, i, (i + n - 1) % n, (i + 1) % n, sub[i], sup[i])).collect();
    solve_cyclic(&sub, &diag, &sup, &d)
}

/// Sherman–Morrison cyclic tridiagonal solve with `sub[0]` and `sup[n-1]`
/// as the corner entries.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], d: &[Vec3]) -> Vec<Vec3> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = thomas(sub, &b, sup, d);
    let mut u = vec![Vec3::zeros(); n];
    u[0] = Vec3::repeat(gamma);
    u[n - 1] = Vec3::repeat(alpha);
    let z = thomas(sub, &b, sup, &u);
    let denom = 1.0 + z[0].x + beta * z[n - 1].x / gamma;
    let fact = (x[0] + x[n - 1] * (beta / gamma)) / denom;
    (0..n).map(|i| x[i] - z[i].x * fact).collect()
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], d: &[Vec3]) -> Vec<Vec3> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut r = vec![Vec3::zeros(); n];
    c[0] = sup[0] / diag[0];
    r[0] = d[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        r[i] = (d[i] - r[i - 1] * sub[i]) / m;
    }
    for i in (0..n - 1).rev() {
        let next = r[i + 1];
        r[i] -= next * c[i];
    }
    r
}
