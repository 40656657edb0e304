use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PipelineError, Result};
use crate::mesh::primitives::grid_height_field;
use crate::mesh::{parse_stl, write_stl_binary, write_xyz, PointCloud, TriMesh};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Spherical-cap faces versus faces on a deeper ellipsoidal cap.
    SphereBump,
    /// Ellipsoidal faces whose groups differ in nose size.
    EllipsoidBump,
    /// Hollow four-leaf clovers, clean versus two leaves filled with points.
    CloverCloud,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::SphereBump => "sphere-bump",
            Family::EllipsoidBump => "ellipsoid-bump",
            Family::CloverCloud => "clover-cloud",
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sphere-bump" => Ok(Family::SphereBump),
            "ellipsoid-bump" => Ok(Family::EllipsoidBump),
            "clover-cloud" => Ok(Family::CloverCloud),
            other => Err(format!("unknown family `{other}` (expected sphere-bump, ellipsoid-bump or clover-cloud)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub family: Family,
    pub n_subjects: usize,
    /// Amplitude (mm) of smooth per-subject surface perturbations; for
    /// clovers, the radial jitter as a fraction of the leaf length.
    pub noise: f64,
    pub seed: u64,
    /// Relative size of the between-group difference.
    pub offset: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self { family: Family::SphereBump, n_subjects: 8, noise: 1.0, seed: 0, offset: 0.6 }
    }
}

const CAP_RADIUS: f64 = 90.0;
const NOSE_HEIGHT: f64 = 18.0;
const NOSE_WIDTH: f64 = 9.0;
const GRID: usize = 61;
const SPACING: f64 = 2.0;
/// Grid positions (column, row) of the nose tip and the left and right eyes.
const NOSE_AT: (usize, usize) = (30, 30);
const LEFT_EYE_AT: (usize, usize) = (15, 42);
const RIGHT_EYE_AT: (usize, usize) = (45, 42);

/// Writes a labelled synthetic dataset and a matching `config.txt` into `out`.
///
/// The first `⌈n/2⌉` subjects are labelled `no-risk`, the rest `risk`.
/// Returns the written paths in creation order.
pub fn generate_synthetic(opts: &SynthOptions, out: &Path) -> Result<Vec<PathBuf>> {
    if opts.n_subjects < 2 {
        return Err(PipelineError::Config(format!("need at least 2 subjects, got {}", opts.n_subjects)));
    }
    if !(opts.noise >= 0.0 && opts.noise.is_finite()) || !(opts.offset >= 0.0 && opts.offset.is_finite()) {
        return Err(PipelineError::Config("noise and offset must be finite and non-negative".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
    let n_first = opts.n_subjects.div_ceil(2);
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = out.join(name);
        std::fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    let mut labels = String::from("subject_id,label\n");
    let mut landmarks = String::from("subject_id,nose_idx,left_eye_idx,right_eye_idx\n");
    for s in 0..opts.n_subjects {
        let id = format!("s{s:03}");
        let risk = s >= n_first;
        let _ = writeln!(labels, "{id},{}", if risk { "risk" } else { "no-risk" });
        let seed = opts.seed.wrapping_add(s as u64);
        match opts.family {
            Family::CloverCloud => {
                let noisy = if risk { 2 } else { 0 };
                let pts = clover_points_with(200, noisy, opts.noise, seed);
                let n = pts.len();
                let cloud = PointCloud::new(pts, Some(vec![0.0; n])).expect("finite points");
                put(&format!("{id}.xyz"), write_xyz(&cloud).as_bytes())?;
            }
            family => {
                let (mesh, lm) = synthetic_face(family, risk, opts, seed);
                let [a, b, c] = lm;
                let _ = writeln!(landmarks, "{id},{a},{b},{c}");
                put(&format!("{id}.stl"), &write_stl_binary(&mesh))?;
            }
        }
    }
    put("labels.csv", labels.as_bytes())?;
    let config = match opts.family {
        Family::CloverCloud => "dataset_dir = .\nlabels_file = labels.csv\noutput_dir = results\n\
             branch = ph-curvature\nmetrics = de,dH\nt_max = 1.0\ndownsample_n = 300\n"
            .to_string(),
        _ => {
            put("landmarks.csv", landmarks.as_bytes())?;
            "dataset_dir = .\nlabels_file = labels.csv\nlandmarks_file = landmarks.csv\noutput_dir = results\n\
             branch = all\nn_perm = 999\n"
                .to_string()
        }
    };
    put("config.txt", format!("# synthetic {} dataset, seed {}\n{config}seed = {}\n", opts.family.as_str(), opts.seed, opts.seed).as_bytes())?;
    Ok(written)
}

/// Face-like height field in a random rigid pose, with landmark vertex
/// indices valid for the mesh as re-read from STL.
fn synthetic_face(family: Family, risk: bool, opts: &SynthOptions, seed: u64) -> (TriMesh, [usize; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (depth, nose) = match (family, risk) {
        (Family::SphereBump, false) => (1.0, 1.0),
        (Family::SphereBump, true) => (1.0 + opts.offset, 1.0),
        (_, false) => (1.3, 1.0),
        (_, true) => (1.3, 1.0 + opts.offset),
    };
    let bumps: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(12.0..25.0),
                opts.noise * rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    let c = CAP_RADIUS * depth;
    let flat = grid_height_field(GRID, GRID, SPACING, SPACING, |x, y| {
        let r2 = x * x + y * y;
        let cap = c * ((1.0 - r2 / (CAP_RADIUS * CAP_RADIUS)).max(0.0).sqrt() - 1.0);
        let bump = NOSE_HEIGHT * nose * (-r2 / (2.0 * NOSE_WIDTH * NOSE_WIDTH)).exp();
        let wobble: f64 =
            bumps.iter().map(|&(bx, by, w, a)| a * (-((x - bx).powi(2) + (y - by).powi(2)) / (2.0 * w * w)).exp()).sum();
        cap + bump + wobble
    });
    let rotation = Rotation3::from_euler_angles(
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        rng.gen_range(-1.5..1.5),
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    );
    let shift = Vec3::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
    let moved = flat.transformed(rotation.matrix(), &shift);
    // STL stores f32 and re-welds, so vertex order changes on the way back
    let reread = parse_stl(&write_stl_binary(&moved)).expect("own STL parses");
    let at = |(i, j): (usize, usize)| {
        let target = moved.vertices()[j * GRID + i];
        (0..reread.vertex_count())
            .min_by(|&a, &b| {
                (reread.vertices()[a] - target).norm().total_cmp(&(reread.vertices()[b] - target).norm())
            })
            .expect("nonempty mesh")
    };
    let lm = [at(NOSE_AT), at(LEFT_EYE_AT), at(RIGHT_EYE_AT)];
    (reread, lm)
}

/// Hollow four-leaf clover `r = |cos 2θ|` (leaves of unit length) sampled
/// with `n` points at jittered, roughly equal arc-length spacing, plus five
/// interior points in each of the first `noisy_leaves` leaves.
pub fn clover_points(n: usize, noisy_leaves: usize, seed: u64) -> Vec<Vec3> {
    clover_points_with(n, noisy_leaves, 0.0, seed)
}

fn clover_points_with(n: usize, noisy_leaves: usize, radial_noise: f64, seed: u64) -> Vec<Vec3> {
    use std::f64::consts::FRAC_PI_4;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let petal = |centre: f64, theta: f64| {
        let r = (2.0 * (theta - centre)).cos().max(0.0);
        Vec3::new(r * theta.cos(), r * theta.sin(), 0.0)
    };
    // arc-length table of one leaf, reused for all four by symmetry
    const FINE: usize = 4000;
    let mut cum = vec![0.0; FINE + 1];
    for k in 1..=FINE {
        let a = -FRAC_PI_4 + std::f64::consts::FRAC_PI_2 * (k - 1) as f64 / FINE as f64;
        let b = -FRAC_PI_4 + std::f64::consts::FRAC_PI_2 * k as f64 / FINE as f64;
        cum[k] = cum[k - 1] + (petal(0.0, b) - petal(0.0, a)).norm();
    }
    let total = cum[FINE];
    let theta_at = |s: f64| {
        let k = cum.partition_point(|&c| c < s).clamp(1, FINE);
        let frac = (s - cum[k - 1]) / (cum[k] - cum[k - 1]);
        -FRAC_PI_4 + std::f64::consts::FRAC_PI_2 * (k as f64 - 1.0 + frac) / FINE as f64
    };
    let mut pts = Vec::with_capacity(n + 5 * noisy_leaves);
    for leaf in 0..4 {
        let centre = leaf as f64 * std::f64::consts::FRAC_PI_2;
        let count = n / 4 + usize::from(leaf < n % 4);
        for k in 0..count {
            let s = total * (k as f64 + rng.gen_range(0.25..0.75)) / count as f64;
            let p = petal(0.0, theta_at(s));
            let scale = 1.0 + radial_noise * rng.gen_range(-1.0..1.0);
            let (c, sn) = (centre.cos(), centre.sin());
            pts.push(Vec3::new(c * p.x - sn * p.y, sn * p.x + c * p.y, 0.0) * scale);
        }
    }
    for leaf in 0..noisy_leaves.min(4) {
        let centre = leaf as f64 * std::f64::consts::FRAC_PI_2;
        for (k, frac) in [0.2, 0.35, 0.5, 0.65, 0.8].into_iter().enumerate() {
            let side = if k % 2 == 0 { 1.0 } else { -1.0 };
            let phi = centre + side * 0.12 + rng.gen_range(-0.03..0.03);
            pts.push(Vec3::new(frac * phi.cos(), frac * phi.sin(), 0.0));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clover_counts_and_reach() {
        let clean = clover_points(200, 0, 1);
        assert_eq!(clean.len(), 200);
        assert!(clean.iter().all(|p| p.norm() <= 1.0 + 1e-12));
        assert_eq!(clover_points(200, 2, 1).len(), 210);
        assert_eq!(clover_points(200, 0, 1), clean);
    }

    #[test]
    fn faces_rewrite_identically() {
        let dir = tempfile::tempdir().unwrap();
        let opts = SynthOptions { n_subjects: 2, ..Default::default() };
        let a = generate_synthetic(&opts, &dir.path().join("a")).unwrap();
        let b = generate_synthetic(&opts, &dir.path().join("b")).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            if x.file_name().unwrap() != "config.txt" {
                assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
            }
        }
    }

    #[test]
    fn landmarks_follow_the_pose() {
        let opts = SynthOptions::default();
        let (mesh, [nose, left, right]) = synthetic_face(Family::SphereBump, false, &opts, 3);
        let v = mesh.vertices();
        // eyes are 60 mm apart and the nose sits 24 mm below their midpoint
        assert!(((v[right] - v[left]).norm() - 60.0).abs() < 1e-3);
        let mid = (v[left] + v[right]) / 2.0;
        assert!((v[nose] - mid).norm() > 24.0);
    }
}
