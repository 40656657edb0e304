use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{MeshError, PointCloud, Result};

/// Spatially stratified random subsample of `cloud` with `min(target, len)` points.
///
/// Strata are the cells of an axis-aligned grid over the bounding box with
/// `⌈target^(1/3)⌉` cells per axis. Every nonempty stratum keeps at least one
/// point when there are no more strata than `target`; the remaining budget is
/// split in proportion to stratum size (largest remainder). Within a stratum,
/// points are drawn uniformly without replacement. Output keeps input order.
pub fn stratified_downsample(cloud: &PointCloud, target: usize, seed: u64) -> Result<PointCloud> {
    if cloud.is_empty() {
        return Err(MeshError::EmptyCloud);
    }
    if target == 0 {
        return Err(MeshError::ZeroTarget);
    }
    let n = cloud.len();
    if target >= n {
        return Ok(cloud.clone());
    }
    let per_axis = (target as f64).cbrt().ceil().max(1.0) as usize;
    // cbrt can land just above an exact cube
    let per_axis = if (per_axis - 1).pow(3) >= target { per_axis - 1 } else { per_axis }.max(1);

    let pts = cloud.points();
    let mut lo = pts[0];
    let mut hi = pts[0];
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let cell_of = |c: f64, axis: usize| -> usize {
        let extent = hi[axis] - lo[axis];
        if extent <= 0.0 {
            return 0;
        }
        (((c - lo[axis]) / extent * per_axis as f64).floor() as usize).min(per_axis - 1)
    };
    let mut strata: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
    for (i, p) in pts.iter().enumerate() {
        strata.entry([cell_of(p.x, 0), cell_of(p.y, 1), cell_of(p.z, 2)]).or_default().push(i);
    }
    let cells: Vec<Vec<usize>> = strata.into_values().collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = Vec::with_capacity(target);
    if cells.len() > target {
        for c in index::sample(&mut rng, cells.len(), target).into_vec() {
            let members = &cells[c];
            keep.push(members[index::sample(&mut rng, members.len(), 1).index(0)]);
        }
    } else {
        let quotas = allocate(&cells, target);
        for (members, q) in cells.iter().zip(quotas) {
            keep.extend(index::sample(&mut rng, members.len(), q).into_iter().map(|k| members[k]));
        }
    }
    keep.sort_unstable();
    let points = keep.iter().map(|&i| pts[i]).collect();
    let values = cloud.values().map(|v| keep.iter().map(|&i| v[i]).collect());
    PointCloud::new(points, values)
}

/// One point per cell plus a largest-remainder split of the rest by spare capacity.
fn allocate(cells: &[Vec<usize>], target: usize) -> Vec<usize> {
    let spare_total: usize = cells.iter().map(|c| c.len() - 1).sum();
    let budget = target - cells.len();
    let mut quotas: Vec<usize> = Vec::with_capacity(cells.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(cells.len());
    for (k, c) in cells.iter().enumerate() {
        let exact = if spare_total == 0 { 0.0 } else { budget as f64 * (c.len() - 1) as f64 / spare_total as f64 };
        let base = (exact.floor() as usize).min(c.len() - 1);
        quotas.push(1 + base);
        remainders.push((exact - base as f64, k));
    }
    let mut left = target - quotas.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    while left > 0 {
        let before = left;
        for &(_, k) in &remainders {
            if left == 0 {
                break;
            }
            if quotas[k] < cells[k].len() {
                quotas[k] += 1;
                left -= 1;
            }
        }
        if before == left {
            break;
        }
    }
    quotas
}
