//! Deterministic SVG renderings. Coordinates are printed with two decimals
//! so repeated runs produce identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{PipelineError, Result};
use crate::metrics::DistanceMatrix;
use crate::persistence::{Barcode, HilbertFunction, Interval};
use crate::stats::Embedding;

const GROUP_COLOURS: [&str; 2] = ["#1f77b4", "#d62728"];
const SEPARATOR: &str = "#90ee90";

fn open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"white\"/>\n"
    )
}

fn text(s: &mut String, x: f64, y: f64, anchor: &str, body: &str) {
    let _ = writeln!(
        s,
        "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"{anchor}\">{}</text>",
        escape(body)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grey level for `v ∈ [0, max]`: white at 0, near-black at `max`.
fn shade(v: f64, max: f64) -> u8 {
    let f = if max > 0.0 { (v / max).clamp(0.0, 1.0) } else { 0.0 };
    (255.0 - 230.0 * f).round() as u8
}

/// Horizontal interval stacks, one block per degree, over `[0, t_max]`.
///
/// Infinite intervals run to the right edge and end in an arrowhead; an
/// empty input still draws the axis with a "no intervals" note.
pub fn barcode_svg(barcodes: &[Barcode], t_max: f64) -> String {
    let (left, right, top, row) = (50.0, 20.0, 30.0, 6.0);
    let width = 600.0;
    let plot_w = width - left - right;
    let total: usize = barcodes.iter().map(Barcode::len).sum();
    let rows = total + 2 * barcodes.len().max(1);
    let height = top + rows as f64 * row + 40.0;
    let t_max = if t_max > 0.0 && t_max.is_finite() { t_max } else { 1.0 };
    let x_of = |t: f64| left + plot_w * (t / t_max).clamp(0.0, 1.0);
    let mut s = open(width, height);
    s.push_str(
        "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"6\" refY=\"4\" orient=\"auto\">\
         <path d=\"M0,0 L8,4 L0,8 z\" fill=\"black\"/></marker></defs>\n",
    );
    let axis_y = height - 30.0;
    let _ = writeln!(
        s,
        "<line class=\"axis\" x1=\"{left:.2}\" y1=\"{axis_y:.2}\" x2=\"{:.2}\" y2=\"{axis_y:.2}\" stroke=\"black\"/>",
        left + plot_w
    );
    text(&mut s, left, axis_y + 15.0, "middle", "0");
    text(&mut s, left + plot_w, axis_y + 15.0, "middle", &format!("{t_max}"));
    text(&mut s, left + plot_w / 2.0, axis_y + 27.0, "middle", "t");
    if total == 0 {
        text(&mut s, left + plot_w / 2.0, top + 10.0, "middle", "no intervals");
    }
    let mut y = top;
    for bc in barcodes {
        text(&mut s, 5.0, y + row, "start", &format!("H{}", bc.degree));
        y += row;
        for iv in bc.intervals() {
            y += row;
            let Interval { birth, death } = *iv;
            if death.is_infinite() {
                let _ = writeln!(
                    s,
                    "<line class=\"bar infinite\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"3\" marker-end=\"url(#arrow)\"/>",
                    x_of(birth),
                    left + plot_w
                );
            } else {
                let _ = writeln!(
                    s,
                    "<line class=\"bar\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"3\"/>",
                    x_of(birth),
                    x_of(death)
                );
            }
        }
        y += row;
    }
    s.push_str("</svg>\n");
    s
}

/// Cell grid with grey shading, rows drawn top to bottom.
fn heat_cells(s: &mut String, x0: f64, y0: f64, cell: f64, rows: usize, cols: usize, value: impl Fn(usize, usize) -> f64, max: f64) {
    for r in 0..rows {
        for c in 0..cols {
            let v = value(r, c);
            let g = shade(v, max);
            let _ = writeln!(
                s,
                "<rect class=\"cell\" x=\"{:.2}\" y=\"{:.2}\" width=\"{cell:.2}\" height=\"{cell:.2}\" fill=\"rgb({g},{g},{g})\" data-value=\"{v}\"/>",
                x0 + c as f64 * cell,
                y0 + r as f64 * cell
            );
        }
    }
}

/// Hilbert function heatmap: `t` to the right, `τ` upwards, darker = larger.
pub fn hilbert_svg(h: &HilbertFunction) -> String {
    let g = h.grid();
    let cell = (400.0 / g.n_t.max(g.n_tau) as f64).max(4.0);
    let (left, top) = (60.0, 20.0);
    let (w, ht) = (left + cell * g.n_t as f64 + 20.0, top + cell * g.n_tau as f64 + 50.0);
    let mut s = open(w, ht);
    let max = h.max_value() as f64;
    // row r of the picture is value column n_tau - 1 - r
    heat_cells(&mut s, left, top, cell, g.n_tau, g.n_t, |r, c| h.get(c, g.n_tau - 1 - r) as f64, max);
    let bottom = top + cell * g.n_tau as f64;
    text(&mut s, left, bottom + 15.0, "middle", &format!("{}", g.t_lo));
    text(&mut s, left + cell * g.n_t as f64, bottom + 15.0, "middle", &format!("{}", g.t_hi));
    text(&mut s, left + cell * g.n_t as f64 / 2.0, bottom + 30.0, "middle", &format!("t (H{}, max {})", h.degree, h.max_value()));
    text(&mut s, left - 5.0, bottom, "end", &format!("{}", g.tau_lo));
    text(&mut s, left - 5.0, top + 10.0, "end", &format!("{}", g.tau_hi));
    s.push_str("</svg>\n");
    s
}

/// Distance-matrix heatmap (darker = larger) with separator lines at label changes.
pub fn distance_heatmap_svg(dm: &DistanceMatrix) -> String {
    let n = dm.len();
    let cell = (480.0 / n.max(1) as f64).max(2.0);
    let (left, top) = (80.0, 80.0);
    let side = cell * n as f64;
    let mut s = open(left + side + 20.0, top + side + 20.0);
    let max = dm.entries().iter().copied().fold(0.0f64, f64::max);
    heat_cells(&mut s, left, top, cell, n, n, |r, c| dm.get(r, c), max);
    for k in 1..n {
        if dm.labels()[k] != dm.labels()[k - 1] {
            let at = k as f64 * cell;
            let _ = writeln!(
                s,
                "<line class=\"separator\" x1=\"{:.2}\" y1=\"{top:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{SEPARATOR}\" stroke-width=\"3\"/>",
                left + at,
                left + at,
                top + side
            );
            let _ = writeln!(
                s,
                "<line class=\"separator\" x1=\"{left:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{SEPARATOR}\" stroke-width=\"3\"/>",
                top + at,
                left + side,
                top + at
            );
        }
    }
    if n <= 40 {
        for (i, id) in dm.ids().iter().enumerate() {
            text(&mut s, left - 4.0, top + (i as f64 + 0.7) * cell, "end", id);
        }
    }
    s.push_str("</svg>\n");
    s
}

/// First two MDS coordinates, one colour per label (sorted label order).
pub fn mds_scatter_svg(emb: &Embedding, dm: &DistanceMatrix) -> String {
    let (size, pad) = (500.0, 50.0);
    let mut s = open(size, size);
    let n = emb.coordinates.nrows();
    let coord = |i: usize, k: usize| if k < emb.dim() { emb.coordinates[(i, k)] } else { 0.0 };
    let span = (0..n).flat_map(|i| [coord(i, 0).abs(), coord(i, 1).abs()]).fold(0.0f64, f64::max);
    let span = if span > 0.0 { span } else { 1.0 };
    let map = |v: f64| size / 2.0 + (size / 2.0 - pad) * v / span;
    let mut labels: Vec<&String> = dm.labels().iter().collect();
    labels.sort();
    labels.dedup();
    for (g, label) in labels.iter().enumerate() {
        let colour = GROUP_COLOURS[g % GROUP_COLOURS.len()];
        let _ = writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{colour}\"/>", 20.0, 20.0 + 16.0 * g as f64);
        text(&mut s, 30.0, 24.0 + 16.0 * g as f64, "start", label);
    }
    for i in 0..n {
        let g = labels.iter().position(|l| **l == dm.labels()[i]).unwrap_or(0);
        let _ = writeln!(
            s,
            "<circle class=\"point\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\" data-id=\"{}\"/>",
            map(coord(i, 0)),
            map(-coord(i, 1)),
            GROUP_COLOURS[g % GROUP_COLOURS.len()],
            escape(&dm.ids()[i])
        );
    }
    text(&mut s, size / 2.0, size - 10.0, "middle", "MDS 1");
    s.push_str("</svg>\n");
    s
}

fn data_err(path: &Path, line: usize, m: impl std::fmt::Display) -> PipelineError {
    PipelineError::Data(format!("{}:{line}: {m}", path.display()))
}

fn read_barcode_csv(path: &Path) -> Result<Vec<Barcode>> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let mut by_degree: std::collections::BTreeMap<usize, Vec<Interval>> = Default::default();
    for (no, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let [d, b, e] = cols.as_slice() else {
            return Err(data_err(path, no + 1, "expected degree,birth,death"));
        };
        let degree = d.parse().map_err(|e| data_err(path, no + 1, e))?;
        let birth = b.parse().map_err(|e| data_err(path, no + 1, e))?;
        let death = if *e == "inf" { f64::INFINITY } else { e.parse().map_err(|e| data_err(path, no + 1, e))? };
        by_degree.entry(degree).or_default().push(Interval { birth, death });
    }
    Ok(by_degree.into_iter().map(|(d, iv)| Barcode::new(d, iv)).collect())
}

fn read_mds_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<[f64; 2]>)> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let (mut ids, mut labels, mut xy) = (Vec::new(), Vec::new(), Vec::new());
    for (no, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(data_err(path, no + 1, "expected id,label,x1[,x2..]"));
        }
        let x: f64 = cols[2].parse().map_err(|e| data_err(path, no + 1, e))?;
        let y: f64 = match cols.get(3) {
            Some(c) => c.parse().map_err(|e| data_err(path, no + 1, e))?,
            None => 0.0,
        };
        ids.push(cols[0].to_string());
        labels.push(cols[1].to_string());
        xy.push([x, y]);
    }
    Ok((ids, labels, xy))
}

/// Re-renders SVGs next to the CSV artifacts found in `dir`: matrix
/// heatmaps from `*_matrix.csv`, scatters from `*_mds.csv` and barcodes
/// from `*_barcode.csv` (scaled to the longest finite death).
pub fn render_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut csvs: Vec<PathBuf> = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| PipelineError::io(&d, e))? {
            let p = entry.map_err(|e| PipelineError::io(&d, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                csvs.push(p);
            }
        }
    }
    csvs.sort();
    let mut written = Vec::new();
    for csv in csvs {
        let name = csv.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        let svg = if let Some(stem) = name.strip_suffix("_matrix") {
            let f = std::fs::File::open(&csv).map_err(|e| PipelineError::io(&csv, e))?;
            let dm = DistanceMatrix::read_csv(std::io::BufReader::new(f)).map_err(|e| data_err(&csv, 0, e))?;
            Some((format!("{stem}_heatmap.svg"), distance_heatmap_svg(&dm)))
        } else if let Some(stem) = name.strip_suffix("_mds") {
            let (ids, labels, xy) = read_mds_csv(&csv)?;
            let n = ids.len();
            let coordinates = nalgebra::DMatrix::from_fn(n, 2, |i, k| xy[i][k]);
            let emb = Embedding { coordinates, eigenvalues: Vec::new(), negative_eigenvalues: 0, padded: false };
            // the scatter only reads ids and labels from the matrix
            let dm = DistanceMatrix::new(ids, labels, vec![0.0; n * n]).map_err(|e| data_err(&csv, 0, e))?;
            Some((format!("{stem}_mds.svg"), mds_scatter_svg(&emb, &dm)))
        } else if let Some(stem) = name.strip_suffix("_barcode") {
            let bcs = read_barcode_csv(&csv)?;
            let t_max = bcs
                .iter()
                .flat_map(|b| b.intervals().iter().map(|iv| if iv.is_infinite() { iv.birth } else { iv.death }))
                .fold(0.0f64, f64::max);
            Some((format!("{stem}_barcode.svg"), barcode_svg(&bcs, t_max * 1.1)))
        } else {
            None
        };
        if let Some((file, body)) = svg {
            let path = csv.with_file_name(file);
            std::fs::write(&path, body).map_err(|e| PipelineError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
