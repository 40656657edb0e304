use super::{Curve, CurveKind, Result, ShapeError};
use crate::{Mat3, Vec3};

/// Closure residual accepted by [`project_closed`].
pub const CLOSURE_TOLERANCE: f64 = 1e-6;
/// Iteration cap for [`project_closed`].
pub const CLOSURE_MAX_ITERATIONS: usize = 200;

/// Samples of an SRV function on a uniform parameter grid over [0, 1].
///
/// Open functions sample `t_i = i/(N-1)` and integrate with the trapezoid
/// rule; closed functions sample `t_i = i/N` and use the periodic rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SrvFunction {
    values: Vec<Vec3>,
    kind: CurveKind,
    dim: usize,
}

impl SrvFunction {
    pub fn new(values: Vec<Vec3>, kind: CurveKind, dim: usize) -> Self {
        Self { values, kind, dim }
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing of the parameter.
    pub fn step(&self) -> f64 {
        match self.kind {
            CurveKind::Open => 1.0 / (self.values.len() - 1) as f64,
            CurveKind::Closed => 1.0 / self.values.len() as f64,
        }
    }

    /// Parameter value of sample `i`.
    pub fn param(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// Quadrature weight of sample `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        match self.kind {
            CurveKind::Open if i == 0 || i + 1 == self.values.len() => h / 2.0,
            _ => h,
        }
    }

    /// Integral of a per-sample scalar under this function's quadrature rule.
    pub(crate) fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.values.len()).map(|i| self.weight(i) * f(i)).sum()
    }

    pub(crate) fn compatible(&self, other: &SrvFunction) -> Result<()> {
        if self.kind != other.kind {
            return Err(ShapeError::KindMismatch(self.kind, other.kind));
        }
        if self.values.len() != other.values.len() {
            return Err(ShapeError::SampleMismatch(self.values.len(), other.values.len()));
        }
        Ok(())
    }

    /// L² inner product.
    pub fn inner(&self, other: &SrvFunction) -> Result<f64> {
        self.compatible(other)?;
        Ok(self.integrate(|i| self.values[i].dot(&other.values[i])))
    }

    /// L² norm, so `norm()^2 = ∫‖ν‖²`.
    pub fn norm(&self) -> f64 {
        self.integrate(|i| self.values[i].norm_squared()).sqrt()
    }

    /// `∫ ν‖ν‖ dt`, zero exactly when the recovered curve closes.
    pub fn closure_vector(&self) -> Vec3 {
        (0..self.values.len()).map(|i| self.values[i] * (self.values[i].norm() * self.weight(i))).sum()
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_vector().norm()
    }

    /// Scaled onto the unit sphere.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(ShapeError::ZeroFunction);
        }
        Ok(self.scaled(1.0 / n))
    }

    pub(crate) fn scaled(&self, s: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * s).collect(), kind: self.kind, dim: self.dim }
    }

    pub(crate) fn map_values(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self { values: self.values.iter().map(f).collect(), kind: self.kind, dim: self.dim }
    }

    /// Linear interpolation at parameter `t` (periodic for closed functions).
    pub(crate) fn sample_at(&self, t: f64) -> Vec3 {
        let n = self.values.len();
        match self.kind {
            CurveKind::Open => {
                let x = (t * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
                let i = (x.floor() as usize).min(n - 2);
                let f = x - i as f64;
                self.values[i] * (1.0 - f) + self.values[i + 1] * f
            }
            CurveKind::Closed => {
                let x = (t * n as f64).rem_euclid(n as f64);
                let i = (x.floor() as usize).min(n - 1);
                let f = x - i as f64;
                self.values[i] * (1.0 - f) + self.values[(i + 1) % n] * f
            }
        }
    }
}

fn velocity(curve: &Curve) -> Result<Vec<Vec3>> {
    let p = curve.points();
    let n = p.len();
    let closed = curve.kind() == CurveKind::Closed;
    let segs = if closed { n } else { n - 1 };
    for i in 0..segs {
        if (p[(i + 1) % n] - p[i]).norm() == 0.0 {
            return Err(ShapeError::CoincidentPoints(i));
        }
    }
    Ok(if closed {
        let h = 1.0 / n as f64;
        (0..n).map(|i| (p[(i + 1) % n] - p[(i + n - 1) % n]) / (2.0 * h)).collect()
    } else {
        let h = 1.0 / (n - 1) as f64;
        (0..n)
            .map(|i| match i {
                0 => (p[1] * 4.0 - p[0] * 3.0 - p[2]) / (2.0 * h),
                _ if i == n - 1 => (p[n - 1] * 3.0 - p[n - 2] * 4.0 + p[n - 3]) / (2.0 * h),
                _ => (p[i + 1] - p[i - 1]) / (2.0 * h),
            })
            .collect()
    })
}

/// SRV samples `α̇/√‖α̇‖` before normalisation (central differences,
/// second-order one-sided at open ends).
pub fn raw_srv(curve: &Curve) -> Result<SrvFunction> {
    let values = velocity(curve)?
        .into_iter()
        .map(|v| {
            let s = v.norm();
            if s > 0.0 {
                v / s.sqrt()
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    Ok(SrvFunction::new(values, curve.kind(), curve.dim()))
}

/// SRV of `curve` scaled to unit L² norm.
pub fn srv_transform(curve: &Curve) -> Result<SrvFunction> {
    raw_srv(curve)?.normalized()
}

/// Recovers `α(t) = ∫₀ᵗ ν‖ν‖` by cumulative trapezoid integration with `α(0) = 0`.
pub fn srv_inverse(srv: &SrvFunction) -> Result<Curve> {
    let n = srv.len();
    let h = srv.step();
    let f: Vec<Vec3> = srv.values().iter().map(|v| v * v.norm()).collect();
    let mut points = Vec::with_capacity(n);
    let mut acc = Vec3::zeros();
    points.push(acc);
    for i in 1..n {
        acc += (f[i - 1] + f[i]) * (h / 2.0);
        points.push(acc);
    }
    let curve = Curve::new_unchecked(points, srv.kind(), srv.dim());
    Ok(curve)
}

/// Result of projecting onto the closed-curve preshape space.
#[derive(Debug, Clone)]
pub struct ClosureProjection {
    pub srv: SrvFunction,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton projection onto `{∫ν‖ν‖ = 0, ∫‖ν‖² = 1}`.
///
/// Each step moves along the gradients `|ν| e_i + ν ν_i/|ν|` of the closure
/// components, solving `(I + 3∫ννᵀ) c = -G`, then renormalises.
pub fn project_closed_detailed(srv: &SrvFunction) -> Result<ClosureProjection> {
    if srv.kind() != CurveKind::Closed {
        return Err(ShapeError::NotClosed);
    }
    let mut q = srv.normalized()?;
    let mut residual = q.closure_residual();
    let mut iterations = 0;
    while residual > CLOSURE_TOLERANCE {
        if iterations == CLOSURE_MAX_ITERATIONS {
            return Err(ShapeError::ClosureNotConverged { iterations, residual });
        }
        iterations += 1;
        let g = q.closure_vector();
        let mut jac = Mat3::identity();
        for i in 0..q.len() {
            let v = q.values[i];
            jac += v * v.transpose() * (3.0 * q.weight(i));
        }
        let c = jac.lu().solve(&(-g)).ok_or(ShapeError::ClosureNotConverged { iterations, residual })?;
        let direction: Vec<Vec3> = q
            .values
            .iter()
            .map(|v| {
                let s = v.norm();
                if s > 0.0 {
                    c * s + v * (v.dot(&c) / s)
                } else {
                    Vec3::zeros()
                }
            })
            .collect();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = SrvFunction::new(
                q.values.iter().zip(&direction).map(|(v, d)| v + d * step).collect(),
                q.kind,
                q.dim,
            );
            if let Ok(trial) = trial.normalized() {
                let r = trial.closure_residual();
                if r < residual {
                    accepted = Some((trial, r));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, r)) => {
                q = trial;
                residual = r;
            }
            None => return Err(ShapeError::ClosureNotConverged { iterations, residual }),
        }
    }
    Ok(ClosureProjection { srv: q, iterations, residual })
}

/// Projects a closed SRV onto the closed-curve preshape space.
pub fn project_closed(srv: &SrvFunction) -> Result<SrvFunction> {
    Ok(project_closed_detailed(srv)?.srv)
}
