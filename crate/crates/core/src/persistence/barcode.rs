use std::collections::HashMap;
use std::io::Write;

use super::{Filtration, PersistenceError, Result};

/// Half-open interval `[birth, death)`; `death` is `+∞` for classes that never die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_infinite(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }
}

/// Persistence intervals of one homology degree, sorted by (birth, death).
#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    pub degree: usize,
    intervals: Vec<Interval>,
}

impl Barcode {
    pub fn new(degree: usize, mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
        Self { degree, intervals }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of intervals containing `t`, i.e. the Betti number at scale `t`.
    pub fn betti_at(&self, t: f64) -> usize {
        self.intervals.iter().filter(|iv| iv.contains(t)).count()
    }

    /// Persistences in decreasing order (infinite first).
    pub fn persistences(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.intervals.iter().map(Interval::persistence).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        p
    }
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Checks order and face closure; returns each simplex's facet positions.
fn boundaries(f: &Filtration) -> Result<Vec<Vec<usize>>> {
    let s = f.simplices();
    let mut position = HashMap::with_capacity(s.len());
    let mut out = Vec::with_capacity(s.len());
    for (i, simplex) in s.iter().enumerate() {
        if i > 0 && s[i - 1].order(simplex) != std::cmp::Ordering::Less {
            return Err(PersistenceError::NotSorted(i));
        }
        let mut col = Vec::with_capacity(3);
        for facet in simplex.facets() {
            match position.get(&facet) {
                Some(&p) => col.push(p),
                None => return Err(PersistenceError::NotFaceClosed(i)),
            }
        }
        col.sort_unstable();
        position.insert(simplex.key(), i);
        out.push(col);
    }
    Ok(out)
}

/// Degree-0 and degree-1 barcodes of a filtration.
///
/// Pairing is the standard GF(2) boundary-matrix reduction. Edge columns are
/// reduced with a union–find (which yields the same pairs under the elder
/// rule); triangle columns are reduced explicitly, and edges they kill are
/// never reduced themselves (clearing). Zero-length intervals are dropped.
pub fn compute_barcodes(f: &Filtration) -> Result<[Barcode; 2]> {
    let bd = boundaries(f)?;
    Ok([degree0(f, &bd), degree1(f, &bd)])
}

/// Barcode of degree `p ∈ {0, 1}`.
pub fn compute_barcode(f: &Filtration, p: usize) -> Result<Barcode> {
    if p > 1 {
        return Err(PersistenceError::BadDegree(p));
    }
    let bd = boundaries(f)?;
    Ok(if p == 0 { degree0(f, &bd) } else { degree1(f, &bd) })
}

fn degree0(f: &Filtration, bd: &[Vec<usize>]) -> Barcode {
    let s = f.simplices();
    let mut parent: Vec<usize> = (0..s.len()).collect();
    let mut intervals = Vec::new();
    for (i, simplex) in s.iter().enumerate() {
        if simplex.dim() != 1 {
            continue;
        }
        let (ra, rb) = (find(&mut parent, bd[i][0]), find(&mut parent, bd[i][1]));
        if ra == rb {
            continue;
        }
        // roots are the oldest vertex of each component; the younger dies
        let (old, young) = (ra.min(rb), ra.max(rb));
        parent[young] = old;
        if simplex.t > s[young].t {
            intervals.push(Interval { birth: s[young].t, death: simplex.t });
        }
    }
    for (i, simplex) in s.iter().enumerate() {
        if simplex.dim() == 0 && parent[i] == i {
            intervals.push(Interval { birth: simplex.t, death: f64::INFINITY });
        }
    }
    Barcode::new(0, intervals)
}

fn degree1(f: &Filtration, bd: &[Vec<usize>]) -> Barcode {
    let s = f.simplices();
    let mut death: HashMap<usize, f64> = HashMap::new();
    let mut pivots: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, simplex) in s.iter().enumerate() {
        if simplex.dim() != 2 {
            continue;
        }
        let mut col = bd[i].clone();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(other) => col = xor_sorted(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            death.insert(low, simplex.t);
            pivots.insert(low, col);
        }
    }
    // positive edges are those closing a cycle in the union–find sweep
    let mut parent: Vec<usize> = (0..s.len()).collect();
    let mut intervals = Vec::new();
    for (i, simplex) in s.iter().enumerate() {
        if simplex.dim() != 1 {
            continue;
        }
        let (ra, rb) = (find(&mut parent, bd[i][0]), find(&mut parent, bd[i][1]));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
            continue;
        }
        let d = death.get(&i).copied().unwrap_or(f64::INFINITY);
        if d > simplex.t {
            intervals.push(Interval { birth: simplex.t, death: d });
        }
    }
    Barcode::new(1, intervals)
}

/// β_p of the complex at scale `t`.
pub fn betti(f: &Filtration, p: usize, t: f64) -> Result<usize> {
    Ok(compute_barcode(f, p)?.betti_at(t))
}

/// CSV `degree,birth,death` with `inf` for infinite deaths.
pub fn write_barcode_csv<W: Write>(mut w: W, barcodes: &[Barcode]) -> std::io::Result<()> {
    writeln!(w, "degree,birth,death")?;
    for bc in barcodes {
        for iv in bc.intervals() {
            if iv.is_infinite() {
                writeln!(w, "{},{:?},inf", bc.degree, iv.birth)?;
            } else {
                writeln!(w, "{},{:?},{:?}", bc.degree, iv.birth, iv.death)?;
            }
        }
    }
    Ok(())
}
