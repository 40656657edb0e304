mod common;

use common::{bottleneck, random_cloud, rips_betti, rng};
use facetopo::mesh::PointCloud;
use facetopo::persistence::{build_bifiltration, compute_barcode, hilbert_function, restrict, Barcode, GridSpec};
use facetopo::Vec3;
use proptest::prelude::*;
use rand::Rng;

fn valued(seed: u64, n: usize, dim: usize) -> (Vec<Vec3>, Vec<f64>) {
    let mut r = rng(seed);
    let pts = random_cloud(&mut r, n, dim);
    // a few repeated values so several vertices share a grade
    let vals = (0..n).map(|_| r.gen_range(0..4) as f64 * 0.25).collect();
    (pts, vals)
}

fn as_pairs(b: &Barcode) -> Vec<(f64, f64)> {
    b.intervals().iter().map(|i| (i.birth, i.death)).collect()
}

fn sorted_pairs(b: &Barcode) -> Vec<(u64, u64)> {
    let mut v: Vec<_> = b.intervals().iter().map(|i| (i.birth.to_bits(), i.death.to_bits())).collect();
    v.sort();
    v
}

#[test]
fn degree_zero_can_drop_as_value_grows() {
    // the middle vertex arrives late and joins the two early ones
    let pts = vec![Vec3::zeros(), Vec3::new(0.5, 0.0, 0.0), Vec3::x()];
    let bf = build_bifiltration(&PointCloud::new(pts, Some(vec![0.0, 1.0, 0.0])).unwrap(), 2.0, 1).unwrap();
    let g = GridSpec::new((0.0, 1.0), 2, (0.0, 2.0), 2).unwrap();
    let h = hilbert_function(&bf, 0, &g).unwrap();
    assert_eq!((h.get(1, 0), h.get(1, 1)), (2, 1));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn barcodes_agree_with_rank_oracle(seed in any::<u64>(), n in 1usize..9, dims in 1usize..3, t_max in 0.3f64..1.5) {
        let (pts, vals) = valued(seed, n, 2);
        let bf = build_bifiltration(&PointCloud::new(pts.clone(), Some(vals.clone())).unwrap(), t_max, dims).unwrap();
        let mut taus = vals.clone();
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        for &tau in &taus {
            let f = restrict(&bf, tau);
            let mut grades: Vec<f64> = f.simplices().iter().map(|s| s.t).collect();
            grades.push(0.0);
            grades.sort_by(f64::total_cmp);
            grades.dedup();
            for p in 0..dims {
                let bc = compute_barcode(&f, p).unwrap();
                for &t in &grades {
                    prop_assert_eq!(bc.betti_at(t), rips_betti(&pts, &vals, t, tau, dims, p), "tau {} t {} p {}", tau, t, p);
                }
            }
        }
    }

    #[test]
    fn degree_zero_hilbert_is_monotone(seed in any::<u64>(), n in 2usize..25) {
        let (pts, vals) = valued(seed, n, 3);
        let bf = build_bifiltration(&PointCloud::new(pts, Some(vals)).unwrap(), 1.0, 1).unwrap();
        let g = GridSpec::new((0.0, 1.0), 8, (0.0, 1.0), 8).unwrap();
        let h = hilbert_function(&bf, 0, &g).unwrap();
        for i in 0..g.n_t {
            for j in 0..g.n_tau {
                if i + 1 < g.n_t {
                    prop_assert!(h.get(i + 1, j) <= h.get(i, j));
                }
                // growth in the value direction only holds before any edge exists
                if i == 0 && j + 1 < g.n_tau {
                    prop_assert!(h.get(i, j + 1) >= h.get(i, j));
                }
            }
        }
    }

    #[test]
    fn degree_zero_count_at_zero_scale(seed in any::<u64>(), n in 1usize..30, tau in 0.0f64..1.0) {
        let (pts, vals) = valued(seed, n, 3);
        let bf = build_bifiltration(&PointCloud::new(pts, Some(vals.clone())).unwrap(), 0.5, 2).unwrap();
        let bc = compute_barcode(&restrict(&bf, tau), 0).unwrap();
        prop_assert_eq!(bc.betti_at(0.0), vals.iter().filter(|&&v| v <= tau).count());
    }

    #[test]
    fn rips_perturbation_moves_degree_zero_bars_at_most_twice(seed in any::<u64>(), n in 2usize..20, eps in 0.0f64..0.05) {
        let mut r = rng(seed);
        let pts = random_cloud(&mut r, n, 2);
        let moved: Vec<Vec3> = pts
            .iter()
            .map(|p| {
                let a = r.gen_range(0.0..std::f64::consts::TAU);
                p + Vec3::new(a.cos(), a.sin(), 0.0) * eps * r.gen_range(0.0..=1.0)
            })
            .collect();
        // t_max beyond every diameter so each cloud has one essential class
        let bar = |pts: Vec<Vec3>| {
            let bf = build_bifiltration(&PointCloud::new(pts, Some(vec![0.0; n])).unwrap(), 3.0, 1).unwrap();
            compute_barcode(&restrict(&bf, 0.0), 0).unwrap()
        };
        let d = bottleneck(&as_pairs(&bar(pts)), &as_pairs(&bar(moved)));
        prop_assert!(d <= 2.0 * eps + 1e-12, "bottleneck {} > 2·{}", d, eps);
    }

    #[test]
    fn point_order_does_not_change_barcodes(seed in any::<u64>(), n in 1usize..15) {
        let (pts, vals) = valued(seed, n, 3);
        let mut order: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng(seed ^ 0x5eed));
        let pts2: Vec<Vec3> = order.iter().map(|&i| pts[i]).collect();
        let vals2: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        let a = build_bifiltration(&PointCloud::new(pts, Some(vals)).unwrap(), 0.8, 2).unwrap();
        let b = build_bifiltration(&PointCloud::new(pts2, Some(vals2)).unwrap(), 0.8, 2).unwrap();
        for tau in [0.0, 0.25, 0.5, 0.75] {
            for p in 0..2 {
                prop_assert_eq!(
                    sorted_pairs(&compute_barcode(&restrict(&a, tau), p).unwrap()),
                    sorted_pairs(&compute_barcode(&restrict(&b, tau), p).unwrap())
                );
            }
        }
    }

    #[test]
    fn simplex_grades_follow_vertices(seed in any::<u64>(), n in 2usize..20, t_max in 0.1f64..1.0) {
        let (pts, vals) = valued(seed, n, 3);
        let bf = build_bifiltration(&PointCloud::new(pts.clone(), Some(vals.clone())).unwrap(), t_max, 2).unwrap();
        let mut pairs = 0;
        for i in 0..n {
            for j in i + 1..n {
                pairs += usize::from((pts[i] - pts[j]).norm() <= t_max);
            }
        }
        prop_assert_eq!(bf.count_dim(1), pairs);
        for s in bf.simplices() {
            let v = s.vertices();
            let diam = v.iter().flat_map(|&a| v.iter().map(move |&b| (a, b))).map(|(a, b)| (pts[a] - pts[b]).norm()).fold(0.0, f64::max);
            let top = v.iter().map(|&a| vals[a]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(s.t, diam);
            prop_assert_eq!(s.tau, top);
        }
    }
}
