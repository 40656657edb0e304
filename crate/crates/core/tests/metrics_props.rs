mod common;

use common::rng;
use facetopo::metrics::{hausdorff, l2_distance, pairwise_matrix, sublevel_hausdorff, Descriptor, Metric};
use facetopo::persistence::{GridSpec, HilbertFunction};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn grid() -> GridSpec {
    GridSpec::new((0.0, 2.0), 6, (-0.5, 0.5), 5).unwrap()
}

fn random_hilbert(r: &mut impl Rng, max: u32) -> HilbertFunction {
    let g = grid();
    HilbertFunction::new(0, g, (0..g.cells()).map(|_| r.gen_range(0..=max)).collect()).unwrap()
}

/// Direct evaluation: every λ, every pair of cell centres.
fn sublevel_oracle(a: &HilbertFunction, b: &HilbertFunction) -> f64 {
    let g = a.grid();
    let (dt, dtau) = ((g.t_hi - g.t_lo) / g.n_t as f64, (g.tau_hi - g.tau_lo) / g.n_tau as f64);
    let centre = |i: usize, j: usize| (g.t_lo + (i as f64 + 0.5) * dt, g.tau_lo + (j as f64 + 0.5) * dtau);
    let diag = ((g.t_hi - g.t_lo).powi(2) + (g.tau_hi - g.tau_lo).powi(2)).sqrt();
    let top = a.values().iter().chain(b.values()).copied().max().unwrap();
    let mut worst = 0.0f64;
    for lambda in 0..=top {
        let set = |h: &HilbertFunction| -> Vec<(f64, f64)> {
            (0..g.n_t).flat_map(|i| (0..g.n_tau).map(move |j| (i, j))).filter(|&(i, j)| h.get(i, j) <= lambda).map(|(i, j)| centre(i, j)).collect()
        };
        let (sa, sb) = (set(a), set(b));
        let d = match (sa.is_empty(), sb.is_empty()) {
            (true, true) => 0.0,
            (true, false) | (false, true) => diag,
            _ => {
                let one = |x: &[(f64, f64)], y: &[(f64, f64)]| {
                    x.iter()
                        .map(|p| y.iter().map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()).fold(f64::INFINITY, f64::min))
                        .fold(0.0, f64::max)
                };
                one(&sa, &sb).max(one(&sb, &sa))
            }
        };
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn l2_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (random_hilbert(&mut r, 4), random_hilbert(&mut r, 4), random_hilbert(&mut r, 4));
        let d = |x: &HilbertFunction, y: &HilbertFunction| l2_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b) == 0.0, a.values() == b.values());
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        let direct: f64 = a.values().iter().zip(b.values()).map(|(&x, &y)| (x as f64 - y as f64).powi(2) * (2.0 / 6.0) * (1.0 / 5.0)).sum::<f64>().sqrt();
        prop_assert!((d(&a, &b) - direct).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_symmetry_and_union(seed in any::<u64>(), na in 1usize..12, nb in 1usize..12) {
        let mut r = rng(seed);
        let mut pts = |n: usize| -> Vec<[f64; 2]> { (0..n).map(|_| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).collect() };
        let (a, b) = (pts(na), pts(nb));
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        let union: Vec<[f64; 2]> = a.iter().chain(&b).copied().collect();
        prop_assert!(hausdorff(&a, &union).unwrap() <= ab);
    }

    #[test]
    fn sublevel_hausdorff_matches_direct_evaluation(seed in any::<u64>(), max in 0u32..5) {
        let mut r = rng(seed);
        let (a, b) = (random_hilbert(&mut r, max), random_hilbert(&mut r, max));
        let d = sublevel_hausdorff(&a, &b, None).unwrap();
        prop_assert_eq!(d, sublevel_hausdorff(&b, &a, None).unwrap());
        prop_assert_eq!(sublevel_hausdorff(&a, &a, None).unwrap(), 0.0);
        prop_assert!((d - sublevel_oracle(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn matrix_follows_subject_order(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let hs: Vec<HilbertFunction> = (0..n).map(|_| random_hilbert(&mut r, 3)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let labels: Vec<String> = (0..n).map(|i| if i % 2 == 0 { "a".into() } else { "b".into() }).collect();
        for metric in [Metric::L2, Metric::SublevelHausdorff] {
            let m = pairwise_matrix(&hs.iter().cloned().map(Descriptor::Hilbert).collect::<Vec<_>>(), &metric, ids.clone(), labels.clone()).unwrap();
            let p = pairwise_matrix(
                &order.iter().map(|&i| Descriptor::Hilbert(hs[i].clone())).collect::<Vec<_>>(),
                &metric,
                order.iter().map(|&i| ids[i].clone()).collect(),
                order.iter().map(|&i| labels[i].clone()).collect(),
            )
            .unwrap();
            for a in 0..n {
                for b in 0..n {
                    prop_assert_eq!(p.get(a, b), m.get(order[a], order[b]));
                }
                prop_assert_eq!(m.get(a, a), 0.0);
            }
        }
    }
}
