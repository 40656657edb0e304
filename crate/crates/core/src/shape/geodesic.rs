use std::fmt::Write as _;

use super::{project_closed, srv_inverse, CurveKind, Result, ShapeError, SrvFunction};

/// Number of segments in an exported geodesic path.
pub const DEFAULT_PATH_STEPS: usize = 16;

/// Discrete geodesic on the preshape space.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    /// `steps + 1` functions from ν0 to ν1.
    pub points: Vec<SrvFunction>,
    pub length: f64,
}

/// Great-circle interpolation between unit functions.
fn slerp(a: &SrvFunction, b: &SrvFunction, theta: f64, tau: f64) -> SrvFunction {
    let (wa, wb) = if theta < 1e-9 {
        (1.0 - tau, tau)
    } else {
        (((1.0 - tau) * theta).sin() / theta.sin(), (tau * theta).sin() / theta.sin())
    };
    SrvFunction::new(
        a.values().iter().zip(b.values()).map(|(x, y)| x * wa + y * wb).collect(),
        a.kind(),
        a.dim(),
    )
}

/// Angle between two unit functions.
pub(crate) fn sphere_angle(a: &SrvFunction, b: &SrvFunction) -> Result<f64> {
    Ok(a.inner(b)?.clamp(-1.0, 1.0).acos())
}

/// Geodesic between two preshapes with [`DEFAULT_PATH_STEPS`] segments.
pub fn preshape_geodesic(nu0: &SrvFunction, nu1: &SrvFunction) -> Result<GeodesicPath> {
    preshape_geodesic_with(nu0, nu1, DEFAULT_PATH_STEPS)
}

/// Open functions follow the great circle exactly and the length is the
/// angle between the endpoints. For closed functions each interior slerp
/// point is projected back onto the closure constraint and the length is the
/// sum of great-circle arcs between consecutive points.
pub fn preshape_geodesic_with(nu0: &SrvFunction, nu1: &SrvFunction, steps: usize) -> Result<GeodesicPath> {
    nu0.compatible(nu1)?;
    if nu0.dim() != nu1.dim() {
        return Err(ShapeError::DimensionMismatch(nu0.dim(), nu1.dim()));
    }
    let steps = steps.max(1);
    let theta = sphere_angle(nu0, nu1)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(nu0.clone());
    for k in 1..steps {
        let p = slerp(nu0, nu1, theta, k as f64 / steps as f64);
        points.push(match nu0.kind() {
            CurveKind::Open => p.normalized()?,
            CurveKind::Closed => project_closed(&p)?,
        });
    }
    points.push(nu1.clone());
    let length = match nu0.kind() {
        CurveKind::Open => theta,
        CurveKind::Closed => {
            let mut total = 0.0;
            for w in points.windows(2) {
                let (a, b) = (w[0].values(), w[1].values());
                let chord = w[0].integrate(|i| (a[i] - b[i]).norm_squared()).sqrt();
                total += 2.0 * (0.5 * chord).min(1.0).asin();
            }
            total
        }
    };
    Ok(GeodesicPath { points, length })
}

impl GeodesicPath {
    /// CSV `step,curve_index,point_index,x,y,z` of the curves along the path,
    /// each recovered from its SRV and starting at the origin.
    pub fn to_csv(&self, curve_index: usize) -> Result<String> {
        let mut s = String::from("step,curve_index,point_index,x,y,z\n");
        for (step, q) in self.points.iter().enumerate() {
            for (i, p) in srv_inverse(q)?.points().iter().enumerate() {
                let _ = writeln!(s, "{step},{curve_index},{i},{:.17e},{:.17e},{:.17e}", p.x, p.y, p.z);
            }
        }
        Ok(s)
    }
}
