//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use common::{closed_grid_search, ks_uniform, path_energy_length, random_cloud, rips_betti, rng, Wiggle};
use facetopo::mesh::PointCloud;
use facetopo::metrics::{hausdorff, l2_distance, DistanceMatrix};
use facetopo::persistence::{build_bifiltration, compute_barcode, hilbert_function, restrict, GridSpec, HilbertFunction};
use facetopo::pipeline::{clover_points, generate_synthetic, run_pipeline, Branch, BranchSel, Family, PipelineConfig, SynthOptions};
use facetopo::shape::{preshape_geodesic, raw_srv, shape_distance, srv_inverse, srv_transform, Curve, CurveKind, SrvFunction};
use facetopo::stats::{classical_mds, permutation_test};
use facetopo::Vec3;
use nalgebra::Rotation3;
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn long_loops(noisy: usize, seed: u64) -> usize {
    let pts = clover_points(200, noisy, seed);
    let n = pts.len();
    let bf = build_bifiltration(&PointCloud::new(pts, Some(vec![0.0; n])).unwrap(), 0.6, 2).unwrap();
    let p = compute_barcode(&restrict(&bf, 0.0), 1).unwrap().persistences();
    let fifth = p.get(4).copied().unwrap_or(0.0);
    p.iter().filter(|&&x| x > 3.0 * fifth).count()
}

fn clover() -> Outcome {
    let start = Instant::now();
    let mut counts = Vec::new();
    for seed in 0..5 {
        let (clean, noisy) = (long_loops(0, seed), long_loops(2, seed));
        counts.push(format!("{clean}/{noisy}"));
        ensure(clean == 4 && noisy == 2, || format!("seed {seed}: {clean} clean, {noisy} with filled leaves"))?;
    }
    let secs = start.elapsed().as_secs_f64() / 5.0;
    ensure(secs < 10.0, || format!("{secs:.1} s per clover pair"))?;
    Ok(format!("long loops clean/filled over 5 seeds: {}; {secs:.2} s per pair", counts.join(" ")))
}

fn barcode_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut checks = 0;
    for case in 0..50 {
        let n = r.gen_range(1..=10);
        let dims = 1 + case % 2;
        let pts = random_cloud(&mut r, n, 3);
        let vals: Vec<f64> = (0..n).map(|_| r.gen_range(0..3) as f64).collect();
        let t_max = r.gen_range(0.4..2.0);
        let bf = build_bifiltration(&PointCloud::new(pts.clone(), Some(vals.clone())).unwrap(), t_max, dims).unwrap();
        for tau in [0.0, 1.0, 2.0] {
            let f = restrict(&bf, tau);
            let mut grades: Vec<f64> = f.simplices().iter().map(|s| s.t).collect();
            grades.push(0.0);
            grades.sort_by(f64::total_cmp);
            grades.dedup();
            for p in 0..dims {
                let bc = compute_barcode(&f, p).unwrap();
                for &t in &grades {
                    let want = rips_betti(&pts, &vals, t, tau, dims, p);
                    ensure(bc.betti_at(t) == want, || format!("cloud {case}: β{p}({t}, {tau}) = {} vs {want}", bc.betti_at(t)))?;
                    checks += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("{secs:.1} s"))?;
    Ok(format!("{checks} grade checks exact in {secs:.2} s"))
}

fn hilbert_oracle() -> Outcome {
    let mut r = rng(3);
    let grid = GridSpec::new((0.0, 0.6), 10, (0.0, 1.0), 10).unwrap();
    let mut cells = 0;
    for case in 0..10 {
        let pts = random_cloud(&mut r, 30, 2);
        let vals: Vec<f64> = (0..30).map(|_| r.gen_range(0.0..1.0)).collect();
        let bf = build_bifiltration(&PointCloud::new(pts.clone(), Some(vals.clone())).unwrap(), 0.6, 2).unwrap();
        for p in 0..2 {
            let h = hilbert_function(&bf, p, &grid).unwrap();
            for i in 0..grid.n_t {
                for j in 0..grid.n_tau {
                    let want = rips_betti(&pts, &vals, grid.t_grade(i), grid.tau_grade(j), 2, p) as u32;
                    ensure(h.get(i, j) == want, || format!("cloud {case} p {p} cell ({i},{j}): {} vs {want}", h.get(i, j)))?;
                    cells += 1;
                    if p == 0 && i > 0 {
                        ensure(h.get(i, j) <= h.get(i - 1, j), || format!("cloud {case}: β0 grows in t at ({i},{j})"))?;
                    }
                }
            }
        }
    }
    Ok(format!("{cells} cells exact; degree-0 non-increasing in t"))
}

fn square() -> Outcome {
    let pts = vec![Vec3::zeros(), Vec3::x(), Vec3::new(1.0, 1.0, 0.0), Vec3::y()];
    let bf = build_bifiltration(&PointCloud::new(pts, Some(vec![0.0; 4])).unwrap(), 2.0, 2).unwrap();
    let bc = compute_barcode(&restrict(&bf, 0.0), 1).unwrap();
    ensure(bc.len() == 1, || format!("{} intervals", bc.len()))?;
    let iv = bc.intervals()[0];
    ensure((iv.birth - 1.0).abs() <= 1e-12 && (iv.death - 2f64.sqrt()).abs() <= 1e-12, || format!("{iv:?}"))?;
    Ok(format!("[{}, {})", iv.birth, iv.death))
}

fn srv_invariance() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut worst_round = 0.0f64;
    for case in 0..20 {
        let closed = case % 2 == 1;
        let kind = if closed { CurveKind::Closed } else { CurveKind::Open };
        let w = Wiggle::random(&mut r, closed);
        let rot = Rotation3::from_scaled_axis(Vec3::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)));
        let scale = r.gen_range(0.3..3.0);
        let shift = Vec3::new(r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0));
        let start = if closed { r.gen_range(0.0..1.0) } else { 0.0 };
        let base = Curve::new(w.sample(256, |t| t), kind).unwrap();
        let copy = Curve::new(w.sample(256, |t| t + 0.2 * t * (1.0 - t) + start).into_iter().map(|p| rot * p * scale + shift).collect(), kind).unwrap();
        let d = shape_distance(&base, &copy).map_err(|e| e.to_string())?.d_s;
        worst = worst.max(d);
        ensure(d <= 5e-3, || format!("curve {case}: d_s = {d:.2e}"))?;

        // recover up to translation and scale: srv_transform divides by √length
        let q = srv_transform(&base).unwrap();
        let length = raw_srv(&base).unwrap().norm().powi(2);
        let back = srv_inverse(&q).unwrap();
        let p0 = base.points()[0];
        let err = base.points().iter().zip(back.points()).map(|(a, b)| ((a - p0) - b * length).norm()).fold(0.0, f64::max);
        worst_round = worst_round.max(err);
        ensure(err < 1e-3, || format!("curve {case}: round trip {err:.2e}"))?;
    }
    Ok(format!("max d_s {worst:.2e}, max round-trip error {worst_round:.2e}"))
}

fn geodesic_oracle() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for case in 0..10 {
        let q0 = srv_transform(&Curve::new(Wiggle::random(&mut r, false).sample(64, |t| t), CurveKind::Open).unwrap()).unwrap();
        let q1 = srv_transform(&Curve::new(Wiggle::random(&mut r, false).sample(64, |t| t * t), CurveKind::Open).unwrap()).unwrap();
        let d = preshape_geodesic(&q0, &q1).unwrap().length;
        let oracle = path_energy_length(q0.values(), q1.values(), 16, case);
        worst = worst.max((d - oracle).abs());
        ensure((d - oracle).abs() <= 1e-3, || format!("pair {case}: {d:.6} vs oracle {oracle:.6}"))?;
    }
    // constant unit functions along orthogonal axes
    let a = SrvFunction::new(vec![Vec3::x(); 50], CurveKind::Open, 3);
    let b = SrvFunction::new(vec![Vec3::y(); 50], CurveKind::Open, 3);
    let d = preshape_geodesic(&a, &b).unwrap().length;
    ensure((d - std::f64::consts::FRAC_PI_2).abs() <= 1e-9, || format!("orthogonal pair {d}"))?;

    // closed cross-check: circle against a 3:1 ellipse
    let ring = |a: f64, b: f64| -> Vec<Vec3> {
        (0..400).map(|k| {
            let s = std::f64::consts::TAU * k as f64 / 400.0;
            Vec3::new(a * s.cos(), b * s.sin(), 0.0)
        })
        .collect()
    };
    let (c0, c1) = (ring(1.0, 1.0), ring(3.0, 1.0));
    let as_curve = |p: &[Vec3]| Curve::new_2d(&p.iter().map(|v| [v.x, v.y]).collect::<Vec<_>>(), CurveKind::Closed).unwrap();
    let ab = shape_distance(&as_curve(&c0), &as_curve(&c1)).unwrap().d_s;
    let ba = shape_distance(&as_curve(&c1), &as_curve(&c0)).unwrap().d_s;
    let grid = closed_grid_search(&c0, &c1, 128, 64, 64);
    ensure(ab > 0.1 && (ab - ba).abs() <= 1e-6, || format!("circle/ellipse {ab} vs {ba}"))?;
    ensure(ab <= grid + 1e-3, || format!("elastic {ab} above rigid grid search {grid}"))?;
    Ok(format!("open pairs within {worst:.1e} of relaxed path; π/2 exact; circle/ellipse {ab:.4} ≤ grid {grid:.4}"))
}

fn metric_properties() -> Outcome {
    let mut r = rng(7);
    let g = GridSpec::new((0.0, 3.0), 7, (-1.0, 1.0), 6).unwrap();
    // each grid differs from the previous one in a few cells, so triples sit near equality
    let mut near = |base: &[u32]| -> Vec<u32> {
        let mut v = base.to_vec();
        for _ in 0..r.gen_range(0..4) {
            v[r.gen_range(0..base.len())] = r.gen_range(0..6);
        }
        v
    };
    let grid = |v: Vec<u32>| HilbertFunction::new(0, g, v).unwrap();
    let mut slack = f64::INFINITY;
    let mut base: Vec<u32> = vec![0; g.cells()];
    for _ in 0..1000 {
        base = near(&base);
        let (va, vb) = (near(&base), near(&base));
        let vc = near(&vb);
        let (a, b, c) = (grid(va), grid(vb), grid(vc));
        let (ab, bc, ac) = (l2_distance(&a, &b).unwrap(), l2_distance(&b, &c).unwrap(), l2_distance(&a, &c).unwrap());
        slack = slack.min(ab + bc - ac);
        ensure(ac <= ab + bc + 1e-12, || format!("{ac} > {ab} + {bc}"))?;
    }
    let mut r = rng(8);
    for _ in 0..200 {
        let a: Vec<[f64; 2]> = (0..r.gen_range(1..10)).map(|_| [r.gen(), r.gen()]).collect();
        let b: Vec<[f64; 2]> = (0..r.gen_range(1..10)).map(|_| [r.gen(), r.gen()]).collect();
        ensure(hausdorff(&a, &b).unwrap() == hausdorff(&b, &a).unwrap(), || "asymmetric Hausdorff".into())?;
    }
    let one = hausdorff(&[[0.0]], &[[0.0], [1.0]]).unwrap();
    let five = hausdorff(&[[0.0, 0.0]], &[[3.0, 4.0]]).unwrap();
    let pts = [[0.5, 0.25], [2.0, -1.0]];
    let zero = hausdorff(&pts, &pts).unwrap();
    ensure(one == 1.0 && five == 5.0 && zero == 0.0, || format!("analytic cases gave {one}, {five}, {zero}"))?;
    Ok(format!("1000 triples, min slack {slack:.3}; Hausdorff symmetric; 1, 5, 0 exact"))
}

fn labelled(n: usize, f: impl Fn(usize, usize) -> f64, labels: Vec<String>) -> DistanceMatrix {
    let e = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { f(k / n, k % n) }).collect();
    DistanceMatrix::new((0..n).map(|i| format!("s{i:02}")).collect(), labels, e).unwrap()
}

fn permutation_calibration() -> Outcome {
    let mut ps = Vec::with_capacity(200);
    for run in 0..200u64 {
        let mut r = rng(1000 + run);
        let pts = random_cloud(&mut r, 16, 3);
        let mut labels: Vec<String> = (0..16).map(|i| if i < 8 { "a" } else { "b" }.to_string()).collect();
        labels.shuffle(&mut r);
        let dm = labelled(16, |i, j| (pts[i] - pts[j]).norm(), labels);
        ps.push(permutation_test(&dm, 999, run).unwrap().p_value);
    }
    let ks = ks_uniform(&ps);
    ensure(ks <= 0.12, || format!("KS {ks:.3}"))?;

    let split = |n: usize| (0..n).map(|i| if i < n / 2 { "a" } else { "b" }.to_string()).collect::<Vec<_>>();
    let planted = labelled(20, |i, j| if (i < 10) == (j < 10) { 1.0 } else { 10.0 }, split(20));
    let p = permutation_test(&planted, 999, 0).unwrap().p_value;
    ensure(p == 1.0 / 1000.0, || format!("planted p = {p}"))?;

    // six subjects: the exact p over all 20 relabellings is 2/20
    let six = labelled(6, |i, j| if (i < 3) == (j < 3) { 1.0 } else { 2.0 }, split(6));
    let exact = {
        let obs = 9.0 * 2.0 / 9.0;
        let mut hits = 0;
        for mask in 0u32..64 {
            if mask.count_ones() != 3 {
                continue;
            }
            let mut s = 0.0;
            for i in 0..6 {
                for j in 0..6 {
                    if mask >> i & 1 == 1 && mask >> j & 1 == 0 {
                        s += six.get(i, j);
                    }
                }
            }
            hits += usize::from(s / 9.0 >= obs - 1e-12);
        }
        hits as f64 / 20.0
    };
    let mc = permutation_test(&six, 999, 4).unwrap().p_value;
    ensure((mc - exact).abs() <= 0.04, || format!("six-subject p {mc} vs exact {exact}"))?;
    Ok(format!("KS {ks:.3} over 200 runs; planted p = {p}; six-subject p {mc:.3} vs exact {exact}"))
}

fn mds() -> Outcome {
    let check = |pts: &[Vec3], m: usize, tol: f64| -> Result<f64, String> {
        let n = pts.len();
        let dm = labelled(n, |i, j| (pts[i] - pts[j]).norm(), (0..n).map(|i| if i % 2 == 0 { "a" } else { "b" }.to_string()).collect());
        let emb = classical_mds(&dm, m).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((emb.distance(i, j) - dm.get(i, j)).abs());
            }
        }
        ensure(worst <= tol, || format!("{n} points in {m}D: error {worst:.2e}"))?;
        Ok(worst)
    };
    let tri = [Vec3::zeros(), Vec3::x(), Vec3::new(0.5, 3f64.sqrt() / 2.0, 0.0)];
    let e1 = check(&tri, 2, 1e-9)?;
    let e2 = check(&[Vec3::zeros(), Vec3::x(), Vec3::x() * 3.0, Vec3::x() * 4.5], 1, 1e-9)?;
    let mut r = rng(9);
    let mut e3 = 0.0f64;
    for _ in 0..10 {
        let pts: Vec<Vec3> = random_cloud(&mut r, 12, 3).into_iter().map(|p| p * 20.0).collect();
        e3 = e3.max(check(&pts, 3, 1e-6)?);
    }
    Ok(format!("equilateral {e1:.1e}, collinear {e2:.1e}, R³ {e3:.1e}"))
}

fn collect_outputs(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_outputs(&path, root, out);
        } else if path.extension().is_some_and(|e| e == "csv" || e == "json") {
            out.insert(path.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&path).unwrap());
        }
    }
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    generate_synthetic(&SynthOptions { n_subjects: 8, seed: 0, ..SynthOptions::default() }, tmp.path()).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["first", "second"] {
        let mut cfg = PipelineConfig::from_file(&tmp.path().join("config.txt")).map_err(|e| e.to_string())?;
        cfg.output_dir = tmp.path().join(name);
        run_pipeline(&cfg).map_err(|e| e.to_string())?;
        let mut files = BTreeMap::new();
        collect_outputs(&cfg.output_dir, &cfg.output_dir, &mut files);
        outputs.push(files);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(!outputs[0].is_empty() && outputs[0] == outputs[1], || {
        let differ: Vec<&String> = outputs[0].keys().filter(|k| outputs[1].get(*k) != outputs[0].get(*k)).collect();
        format!("{} files differ: {differ:?}", differ.len())
    })?;
    ensure(secs < 300.0, || format!("{secs:.0} s"))?;
    Ok(format!("{} CSV/JSON files byte-identical; two runs in {secs:.1} s", outputs[0].len()))
}

fn separation() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = SynthOptions { family: Family::SphereBump, n_subjects: 20, seed: 11, ..SynthOptions::default() };
    generate_synthetic(&opts, tmp.path()).map_err(|e| e.to_string())?;
    let mut cfg = PipelineConfig::from_file(&tmp.path().join("config.txt")).map_err(|e| e.to_string())?;
    cfg.branch = BranchSel::One(Branch::ShapeGeodesic);
    let art = run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let m = art.matrices.iter().find(|m| m.branch == Branch::ShapeGeodesic).ok_or("no geodesic matrix")?;
    let (p, acc) = (m.permutation.p_value, m.knn.accuracy);
    ensure(p <= 0.01 && acc >= 0.9, || format!("p = {p}, kNN accuracy = {acc}"))?;
    Ok(format!("20 subjects: p = {p:.4}, kNN accuracy = {acc:.2}, {:.1} s", start.elapsed().as_secs_f64()))
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful for this target
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("four-leaf clover loops", clover),
        ("barcodes match the rank oracle", barcode_oracle),
        ("Hilbert function matches the rank oracle", hilbert_oracle),
        ("unit square barcode", square),
        ("SRV invariances and round trip", srv_invariance),
        ("preshape geodesic", geodesic_oracle),
        ("metric properties", metric_properties),
        ("permutation test calibration", permutation_calibration),
        ("classical MDS", mds),
        ("end-to-end determinism", determinism),
        ("synthetic separation", separation),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
