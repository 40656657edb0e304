use nalgebra::{Matrix2, SVD};

use super::{CurveKind, Result, ShapeError, SrvFunction};
use crate::Mat3;

/// Piecewise-linear, strictly increasing reparameterisation.
///
/// Knots run from `(0, shift)` to `(1, shift + 1)`. Open curves always have
/// `shift = 0` (both endpoints fixed); for closed curves the map is read
/// modulo 1 and `shift` is the cyclic offset of the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct Reparam {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Reparam {
    pub fn identity() -> Self {
        Self { xs: vec![0.0, 1.0], ys: vec![0.0, 1.0] }
    }

    /// Validates knots: `xs` spans `[0, 1]`, `ys` spans `[ys[0], ys[0] + 1]`,
    /// both strictly increasing.
    pub fn from_knots(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(ShapeError::BadReparam(format!("{} x-knots vs {} y-knots", xs.len(), ys.len())));
        }
        if let Some(i) = xs.iter().chain(&ys).position(|v| !v.is_finite()) {
            return Err(ShapeError::BadReparam(format!("non-finite knot {i}")));
        }
        for i in 1..xs.len() {
            if !(xs[i] > xs[i - 1] && ys[i] > ys[i - 1]) {
                return Err(ShapeError::NonMonotone(i));
            }
        }
        let n = xs.len() - 1;
        if xs[0].abs() > 1e-12 || (xs[n] - 1.0).abs() > 1e-12 || (ys[n] - ys[0] - 1.0).abs() > 1e-9 {
            return Err(ShapeError::BadReparam("knots must map [0,1] onto an interval of length 1".into()));
        }
        Ok(Self { xs, ys })
    }

    /// Values of γ on the uniform grid `i/(n-1)`.
    pub fn from_grid(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(ShapeError::BadReparam(format!("{n} grid values")));
        }
        Self::from_knots((0..n).map(|i| i as f64 / (n - 1) as f64).collect(), values.to_vec())
    }

    /// The same map followed by a cyclic offset `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self { xs: self.xs.clone(), ys: self.ys.iter().map(|y| y + c).collect() }
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    /// `γ(0)`; zero for endpoint-fixed maps.
    pub fn shift(&self) -> f64 {
        self.ys[0]
    }

    /// γ(t) for `t ∈ [0, 1]` (not wrapped).
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let k = self.xs.partition_point(|&x| x <= t).clamp(1, self.xs.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// Inverse map, as a circle map when the shift is nonzero.
    pub fn inverse(&self) -> Self {
        let c = self.shift().rem_euclid(1.0);
        let base = self.ys[0] - c;
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(self.xs.len() + 2);
        if c == 0.0 {
            pts.extend(self.ys.iter().map(|y| y - base).zip(self.xs.iter().copied()));
        } else {
            // y runs over [c, c+1]; the part beyond 1 wraps to the front
            let cut = self.inverse_unwrapped(1.0 + base);
            for (&x, &y) in self.xs.iter().zip(&self.ys) {
                let y = y - base;
                if y >= 1.0 {
                    pts.push((y - 1.0, x - 1.0));
                } else {
                    pts.push((y, x));
                }
            }
            pts.push((0.0, cut - 1.0));
            pts.push((1.0, cut));
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15);
        }
        let (xs, ys) = pts.into_iter().unzip();
        Self { xs, ys }
    }

    fn inverse_unwrapped(&self, y: f64) -> f64 {
        let k = self.ys.partition_point(|&v| v <= y).clamp(1, self.ys.len() - 1);
        let (x0, x1, y0, y1) = (self.xs[k - 1], self.xs[k], self.ys[k - 1], self.ys[k]);
        x0 + (x1 - x0) * (y - y0) / (y1 - y0)
    }

    /// γ̇ at sample `i` of a grid with spacing `h` and `n` samples
    /// (central differences, second-order one-sided at open ends).
    fn derivative_on_grid(&self, i: usize, n: usize, h: f64, kind: CurveKind) -> f64 {
        let g = |k: f64| self.eval_extended(k * h, kind);
        let i_f = i as f64;
        let d = match kind {
            CurveKind::Closed => (g(i_f + 1.0) - g(i_f - 1.0)) / (2.0 * h),
            CurveKind::Open if i == 0 => (4.0 * g(1.0) - 3.0 * g(0.0) - g(2.0)) / (2.0 * h),
            CurveKind::Open if i == n - 1 => (3.0 * g(i_f) - 4.0 * g(i_f - 1.0) + g(i_f - 2.0)) / (2.0 * h),
            CurveKind::Open => (g(i_f + 1.0) - g(i_f - 1.0)) / (2.0 * h),
        };
        d.max(0.0)
    }

    /// Closed maps extend periodically: γ(t + 1) = γ(t) + 1.
    fn eval_extended(&self, t: f64, kind: CurveKind) -> f64 {
        match kind {
            CurveKind::Open => self.eval(t),
            CurveKind::Closed => {
                let k = t.floor();
                self.eval(t - k) + k
            }
        }
    }
}

/// `(O, γ)·ν = O (ν∘γ) √γ̇`, sampled on ν's grid and renormalised.
///
/// `rotation` must be orthogonal with determinant +1; planar functions use
/// its upper-left 2×2 block.
pub fn group_action(srv: &SrvFunction, rotation: &Mat3, gamma: &Reparam) -> Result<SrvFunction> {
    if srv.kind() == CurveKind::Open && gamma.shift() != 0.0 {
        return Err(ShapeError::BadReparam("open curves require γ(0) = 0".into()));
    }
    let n = srv.len();
    let h = srv.step();
    let values = (0..n)
        .map(|i| {
            let t = srv.param(i);
            let v = srv.sample_at(gamma.eval(t));
            rotation * v * gamma.derivative_on_grid(i, n, h, srv.kind()).sqrt()
        })
        .collect();
    SrvFunction::new(values, srv.kind(), srv.dim()).normalized()
}

/// Rotation `O` maximising `⟨ν0, O ν1⟩`, via the SVD of `Σ w ν0 ν1ᵀ` with a
/// determinant correction so that `det O = +1`.
pub fn procrustes_rotation(q0: &SrvFunction, q1: &SrvFunction) -> Result<Mat3> {
    q0.compatible(q1)?;
    if q0.dim() != q1.dim() {
        return Err(ShapeError::DimensionMismatch(q0.dim(), q1.dim()));
    }
    let mut a = Mat3::zeros();
    for i in 0..q0.len() {
        a += q0.values()[i] * q1.values()[i].transpose() * q0.weight(i);
    }
    if q0.dim() == 2 {
        let a2 = Matrix2::new(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
        let svd = SVD::new(a2, true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut d = Matrix2::identity();
        d[(1, 1)] = (u * vt).determinant().signum();
        let o = u * d * vt;
        let mut out = Mat3::identity();
        out.fixed_view_mut::<2, 2>(0, 0).copy_from(&o);
        return Ok(out);
    }
    let svd = SVD::new(a, true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Mat3::identity();
    d[(2, 2)] = (u * vt).determinant().signum();
    Ok(u * d * vt)
}
