use super::{CurveKind, Reparam, Result, ShapeError, SrvFunction};
use crate::Vec3;

/// Admissible steps `(Δi, Δj)`; slope-1 first so ties resolve toward it.
const STEPS: [(usize, usize); 5] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1)];

/// Reparameterisation γ minimising `∫‖q0 − √γ̇ (q1∘γ)‖²` by dynamic
/// programming on the sample grid, with local slopes in {1/3, 1/2, 1, 2, 3}.
///
/// Closed functions are matched over one full period from the current
/// starting points; the cyclic offset is chosen by the caller.
pub fn optimal_reparam(q0: &SrvFunction, q1: &SrvFunction) -> Result<Reparam> {
    q0.compatible(q1)?;
    let n = q0.len();
    if n < 2 {
        return Err(ShapeError::SampleMismatch(n, n));
    }
    // grid nodes; closed functions repeat the first sample at the end
    let (m, h) = match q0.kind() {
        CurveKind::Open => (n, 1.0 / (n - 1) as f64),
        CurveKind::Closed => (n + 1, 1.0 / n as f64),
    };
    let a: Vec<Vec3> = (0..m).map(|i| q0.values()[i % n]).collect();
    let b: Vec<Vec3> = (0..m).map(|j| q1.values()[j % n]).collect();
    let b_at = |x: f64| -> Vec3 {
        let j = (x.floor() as usize).min(m - 2);
        let f = x - j as f64;
        b[j] * (1.0 - f) + b[j + 1] * f
    };
    let cost = |i: usize, j: usize, di: usize, dj: usize| -> f64 {
        let slope = dj as f64 / di as f64;
        let root = slope.sqrt();
        let mut total = 0.0;
        for k in 0..=di {
            let w = if k == 0 || k == di { 0.5 } else { 1.0 };
            let x = j as f64 + k as f64 * slope;
            total += w * (a[i + k] - b_at(x) * root).norm_squared();
        }
        total * h
    };
    let idx = |i: usize, j: usize| i * m + j;
    let mut table = vec![f64::INFINITY; m * m];
    let mut back = vec![usize::MAX; m * m];
    table[0] = 0.0;
    for i in 1..m {
        for j in 1..m {
            let mut best = f64::INFINITY;
            let mut arg = usize::MAX;
            for (s, &(di, dj)) in STEPS.iter().enumerate() {
                if di > i || dj > j {
                    continue;
                }
                let prev = table[idx(i - di, j - dj)];
                if !prev.is_finite() {
                    continue;
                }
                let c = prev + cost(i - di, j - dj, di, dj);
                if c < best {
                    best = c;
                    arg = s;
                }
            }
            table[idx(i, j)] = best;
            back[idx(i, j)] = arg;
        }
    }
    let (mut i, mut j) = (m - 1, m - 1);
    let mut path = vec![(i, j)];
    while i > 0 || j > 0 {
        let s = back[idx(i, j)];
        if s == usize::MAX {
            return Err(ShapeError::BadReparam("no admissible path".into()));
        }
        let (di, dj) = STEPS[s];
        i -= di;
        j -= dj;
        path.push((i, j));
    }
    path.reverse();
    let scale = 1.0 / (m - 1) as f64;
    let xs = path.iter().map(|&(i, _)| i as f64 * scale).collect();
    let ys = path.iter().map(|&(_, j)| j as f64 * scale).collect();
    Reparam::from_knots(xs, ys)
}
