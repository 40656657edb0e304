//! Independent reference implementations shared by the integration tests.
//!
//! None of these call into the library's algorithms; they only use its plain
//! data types so results can be compared.

#![allow(dead_code)]

use std::collections::HashMap;

use facetopo::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cloud(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            let mut p = Vec3::zeros();
            for k in 0..dim {
                p[k] = rng.gen_range(0.0..1.0);
            }
            p
        })
        .collect()
}

/// Smooth random curve given analytically on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Wiggle {
    closed: bool,
    axes: (f64, f64),
    terms: Vec<(f64, Vec3, Vec3)>,
}

impl Wiggle {
    /// Open: a stretched segment with three bent harmonics. Closed: an
    /// ellipse with two small harmonics. Speed never vanishes in either case.
    pub fn random(rng: &mut impl Rng, closed: bool) -> Self {
        let mut v = |a: f64| Vec3::new(rng.gen_range(-a..a), rng.gen_range(-a..a), rng.gen_range(-a..a));
        let terms = if closed {
            (2..4).map(|k| (k as f64, v(0.05), v(0.05))).collect()
        } else {
            (1..4).map(|k| (k as f64, v(0.08), v(0.08))).collect()
        };
        let axes = (rng.gen_range(1.0..1.5), rng.gen_range(1.0..1.5));
        Wiggle { closed, axes, terms }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        use std::f64::consts::{PI, TAU};
        if self.closed {
            let a = TAU * t;
            let mut p = Vec3::new(self.axes.0 * a.cos(), self.axes.1 * a.sin(), 0.0);
            for (k, c, s) in &self.terms {
                p += c * (k * a).cos() + s * (k * a).sin();
            }
            p
        } else {
            let mut p = Vec3::new(2.0 * t, 0.0, 0.0);
            for (k, c, s) in &self.terms {
                p += (c * (k * PI * t).sin() + s * (1.0 - (k * PI * t).cos())) / *k;
            }
            p
        }
    }

    /// `n` samples of `α∘γ`; closed curves omit the repeated endpoint.
    pub fn sample(&self, n: usize, gamma: impl Fn(f64) -> f64) -> Vec<Vec3> {
        let denom = if self.closed { n } else { n - 1 } as f64;
        (0..n).map(|i| self.at(gamma(i as f64 / denom))).collect()
    }
}

// ---------------------------------------------------------------------------
// Betti numbers of a Rips complex at one grade, by rank over GF(2).

/// Bit-packed GF(2) row.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn highest(&self) -> Option<usize> {
        self.0.iter().enumerate().rev().find(|(_, w)| **w != 0).map(|(k, w)| k * 64 + 63 - w.leading_zeros() as usize)
    }
    fn xor(&mut self, o: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            *a ^= b;
        }
    }
}

/// Rank of a GF(2) matrix given as rows of column indices.
pub fn gf2_rank(rows: &[Vec<usize>], ncols: usize) -> usize {
    let mut pivots: HashMap<usize, Bits> = HashMap::new();
    for r in rows {
        let mut b = Bits::new(ncols);
        for &c in r {
            b.set(c);
        }
        while let Some(h) = b.highest() {
            match pivots.get(&h) {
                Some(p) => b.xor(p),
                None => {
                    pivots.insert(h, b);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// β_p of the complex with vertices `values ≤ tau`, edges of length ≤ `t`,
/// and (if `dims == 2`) every triangle whose edges are all present.
pub fn rips_betti(points: &[Vec3], values: &[f64], t: f64, tau: f64, dims: usize, p: usize) -> usize {
    let verts: Vec<usize> = (0..points.len()).filter(|&i| values[i] <= tau).collect();
    let mut edges = Vec::new();
    for (a, &i) in verts.iter().enumerate() {
        for &j in &verts[a + 1..] {
            if (points[i] - points[j]).norm() <= t {
                edges.push((i, j));
            }
        }
    }
    let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let mut tris = Vec::new();
    if dims >= 2 {
        for (a, &i) in verts.iter().enumerate() {
            for (b, &j) in verts.iter().enumerate().skip(a + 1) {
                if !edge_index.contains_key(&(i, j)) {
                    continue;
                }
                for &k in &verts[b + 1..] {
                    if edge_index.contains_key(&(i, k)) && edge_index.contains_key(&(j, k)) {
                        tris.push([edge_index[&(i, j)], edge_index[&(i, k)], edge_index[&(j, k)]]);
                    }
                }
            }
        }
    }
    let vpos: HashMap<usize, usize> = verts.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let d1: Vec<Vec<usize>> = edges.iter().map(|&(i, j)| vec![vpos[&i], vpos[&j]]).collect();
    let d2: Vec<Vec<usize>> = tris.iter().map(|t| t.to_vec()).collect();
    let r1 = gf2_rank(&d1, verts.len());
    let r2 = gf2_rank(&d2, edges.len());
    match p {
        0 => verts.len() - r1,
        1 => edges.len() - r1 - r2,
        _ => panic!("degree {p} not supported"),
    }
}

// ---------------------------------------------------------------------------
// Bottleneck distance between finite multisets of intervals.

/// Intervals as (birth, death); `death` may be infinite. Infinite intervals
/// are matched only with each other, finite ones with each other or the
/// diagonal.
pub fn bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (ai, af): (Vec<&(f64, f64)>, Vec<_>) = a.iter().partition(|x| x.1.is_infinite());
    let (bi, bf): (Vec<&(f64, f64)>, Vec<_>) = b.iter().partition(|x| x.1.is_infinite());
    if ai.len() != bi.len() {
        return f64::INFINITY;
    }
    let mut ab: Vec<f64> = ai.iter().map(|x| x.0).collect();
    let mut bb: Vec<f64> = bi.iter().map(|x| x.0).collect();
    ab.sort_by(f64::total_cmp);
    bb.sort_by(f64::total_cmp);
    let inf_part = ab.iter().zip(&bb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let linf = |x: &(f64, f64), y: &(f64, f64)| (x.0 - y.0).abs().max((x.1 - y.1).abs());
    let diag = |x: &(f64, f64)| (x.1 - x.0) / 2.0;
    let mut candidates = vec![0.0];
    for x in &af {
        candidates.push(diag(x));
        for y in &bf {
            candidates.push(linf(x, y));
        }
    }
    for y in &bf {
        candidates.push(diag(y));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Square bipartite graph: left = A ∪ diag(B), right = B ∪ diag(A).
    let (n, m) = (af.len(), bf.len());
    let feasible = |eps: f64| -> bool {
        let size = n + m;
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|l| {
                (0..size)
                    .filter(|&r| match (l < n, r < m) {
                        (true, true) => linf(af[l], bf[r]) <= eps,
                        (true, false) => r - m == l && diag(af[l]) <= eps,
                        (false, true) => l - n == r && diag(bf[r]) <= eps,
                        (false, false) => true,
                    })
                    .collect()
            })
            .collect();
        perfect_matching(&adj, size)
    };
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo].max(inf_part)
}

fn perfect_matching(adj: &[Vec<usize>], size: usize) -> bool {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if !seen[r] {
                seen[r] = true;
                if owner[r].is_none_or(|o| augment(o, adj, seen, owner)) {
                    owner[r] = Some(l);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; size];
    (0..size).all(|l| augment(l, adj, &mut vec![false; size], &mut owner))
}

// ---------------------------------------------------------------------------
// Sphere geometry in L²([0,1], R³) with trapezoid weights.

pub fn trapezoid_weights(n: usize) -> Vec<f64> {
    let h = 1.0 / (n - 1) as f64;
    (0..n).map(|i| if i == 0 || i + 1 == n { h / 2.0 } else { h }).collect()
}

pub fn l2_inner(a: &[Vec3], b: &[Vec3], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * x.dot(y)).sum()
}

fn unit(a: Vec<Vec3>, w: &[f64]) -> Vec<Vec3> {
    let n = l2_inner(&a, &a, w).sqrt();
    a.into_iter().map(|v| v / n).collect()
}

/// Length of the shortest path on the unit sphere between `a` and `b`,
/// found by relaxing a perturbed discrete path with `free` interior points.
///
/// Each sweep replaces every interior point by the normalised mean of its
/// neighbours, which decreases the discrete path energy; the length is the
/// sum of great-circle arcs between consecutive points.
pub fn path_energy_length(a: &[Vec3], b: &[Vec3], free: usize, seed: u64) -> f64 {
    let w = trapezoid_weights(a.len());
    let mut rng = rng(seed);
    let segments = free + 1;
    let mut path: Vec<Vec<Vec3>> = (0..=segments)
        .map(|k| {
            let s = k as f64 / segments as f64;
            let mut p: Vec<Vec3> = a.iter().zip(b).map(|(x, y)| x * (1.0 - s) + y * s).collect();
            if k > 0 && k < segments {
                for v in &mut p {
                    *v += Vec3::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
                }
            }
            unit(p, &w)
        })
        .collect();
    for _ in 0..20_000 {
        let mut moved = 0.0f64;
        for k in 1..segments {
            let mid: Vec<Vec3> = path[k - 1].iter().zip(&path[k + 1]).map(|(x, y)| (x + y) / 2.0).collect();
            let next = unit(mid, &w);
            let diff: Vec<Vec3> = next.iter().zip(&path[k]).map(|(x, y)| x - y).collect();
            moved = moved.max(l2_inner(&diff, &diff, &w).sqrt());
            path[k] = next;
        }
        if moved < 1e-13 {
            break;
        }
    }
    path.windows(2)
        .map(|p| {
            let d: Vec<Vec3> = p[0].iter().zip(&p[1]).map(|(x, y)| x - y).collect();
            2.0 * (l2_inner(&d, &d, &w).sqrt() / 2.0).min(1.0).asin()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Closed planar curves: exhaustive rotation × start-point search.

/// `n` points equally spaced in arc length along the closed polygon `pts`,
/// starting `shift` (fraction of the perimeter) past the first vertex.
pub fn resample_closed(pts: &[Vec3], n: usize, shift: f64) -> Vec<Vec3> {
    let m = pts.len();
    let seg: Vec<f64> = (0..m).map(|i| (pts[(i + 1) % m] - pts[i]).norm()).collect();
    let total: f64 = seg.iter().sum();
    (0..n)
        .map(|k| {
            let mut s = ((k as f64 / n as f64 + shift).rem_euclid(1.0)) * total;
            let mut i = 0;
            while s > seg[i] && i + 1 < m {
                s -= seg[i];
                i += 1;
            }
            let f = if seg[i] > 0.0 { (s / seg[i]).min(1.0) } else { 0.0 };
            pts[i] * (1.0 - f) + pts[(i + 1) % m] * f
        })
        .collect()
}

/// Unit-norm SRV of a uniformly sampled closed curve (periodic central differences).
pub fn closed_srv(pts: &[Vec3]) -> Vec<Vec3> {
    let n = pts.len();
    let h = 1.0 / n as f64;
    let q: Vec<Vec3> = (0..n)
        .map(|i| {
            let v = (pts[(i + 1) % n] - pts[(i + n - 1) % n]) / (2.0 * h);
            let s = v.norm();
            if s > 0.0 {
                v / s.sqrt()
            } else {
                v
            }
        })
        .collect();
    let norm = (q.iter().map(|v| v.norm_squared()).sum::<f64>() * h).sqrt();
    q.into_iter().map(|v| v / norm).collect()
}

/// Smallest preshape angle over `rotations` planar rotations and `shifts`
/// start points, with no reparameterisation. Since the elastic distance also
/// optimises over reparameterisations it can only be smaller than this.
pub fn closed_grid_search(c0: &[Vec3], c1: &[Vec3], n: usize, rotations: usize, shifts: usize) -> f64 {
    let q0 = closed_srv(&resample_closed(c0, n, 0.0));
    let h = 1.0 / n as f64;
    let mut best = f64::INFINITY;
    for s in 0..shifts {
        let q1 = closed_srv(&resample_closed(c1, n, s as f64 / shifts as f64));
        for r in 0..rotations {
            let a = std::f64::consts::TAU * r as f64 / rotations as f64;
            let (sn, cs) = a.sin_cos();
            let ip: f64 =
                q0.iter().zip(&q1).map(|(x, y)| x.x * (cs * y.x - sn * y.y) + x.y * (sn * y.x + cs * y.y)).sum::<f64>() * h;
            best = best.min(ip.clamp(-1.0, 1.0).acos());
        }
    }
    best
}

// ---------------------------------------------------------------------------

/// Kolmogorov–Smirnov statistic of a sample against Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}
