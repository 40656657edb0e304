use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::plot::{barcode_svg, distance_heatmap_svg, hilbert_svg, mds_scatter_svg};
use super::{Branch, PipelineConfig, PipelineError, Result, TauRange};
use crate::mesh::{
    extract_level_curves, landmark_align, level_schedule, low_pass_filter, mean_curvature, parse_stl, read_landmarks_csv,
    read_xyz, stratified_downsample, write_curves_csv, FacialCurves, Landmarks, PointCloud, TriMesh,
};
use crate::metrics::{pairwise_matrix, Descriptor, DistanceMatrix, Metric};
use crate::persistence::{
    build_bifiltration, compute_barcodes, hilbert_function, restrict, write_barcode_csv, write_hilbert_csv, Barcode,
    GridSpec, HilbertFunction,
};
use crate::shape::{curve_distances, Curve, ShapeOptions};
use crate::stats::{classical_mds, knn_classify, permutation_test, Embedding, KnnReport, PermutationResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub id: String,
    pub label: String,
    /// `<id>.stl` or `<id>.xyz` inside the dataset directory.
    pub path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    /// Sorted by id.
    pub subjects: Vec<Subject>,
    pub landmarks: BTreeMap<String, Landmarks>,
}

/// Everything a run produced, keyed by path relative to the output directory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub output_dir: PathBuf,
    pub files: BTreeMap<String, Vec<u8>>,
    pub matrices: Vec<MatrixResult>,
}

#[derive(Debug, Clone)]
pub struct MatrixResult {
    pub branch: Branch,
    pub metric: String,
    /// Rows grouped by label.
    pub matrix: DistanceMatrix,
    pub permutation: PermutationResult,
    pub embedding: Embedding,
    pub knn: KnnReport,
}

impl MatrixResult {
    pub fn stem(&self) -> String {
        format!("{}_{}", self.branch.as_str(), self.metric)
    }
}

fn read_labels(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::Config(format!("cannot read labels file {}: {e}", path.display())))?;
    let mut rows: Vec<(String, String)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let [id, label] = cols.as_slice() else {
            return Err(PipelineError::Data(format!("{}:{}: expected `subject_id,label`", path.display(), no + 1)));
        };
        if no == 0 && *id == "subject_id" {
            continue;
        }
        if rows.iter().any(|(r, _)| r == id) {
            return Err(PipelineError::Data(format!("{}:{}: duplicate subject `{id}`", path.display(), no + 1)));
        }
        rows.push((id.to_string(), label.to_string()));
    }
    Ok(rows)
}

/// Resolves labels, subject files and landmarks, checking that every
/// labelled subject has a surface and that there are exactly two labels.
pub fn load_dataset(cfg: &PipelineConfig) -> Result<Dataset> {
    if !cfg.dataset_dir.is_dir() {
        return Err(PipelineError::Config(format!("dataset_dir {} is not a directory", cfg.dataset_dir.display())));
    }
    let rows = read_labels(&cfg.labels_file)?;
    let mut subjects = Vec::with_capacity(rows.len());
    let mut missing = Vec::new();
    for (id, label) in rows {
        let stl = cfg.dataset_dir.join(format!("{id}.stl"));
        let xyz = cfg.dataset_dir.join(format!("{id}.xyz"));
        match (stl.is_file(), xyz.is_file()) {
            (true, _) => subjects.push(Subject { id, label, path: stl }),
            (false, true) => subjects.push(Subject { id, label, path: xyz }),
            _ => missing.push(id),
        }
    }
    if !missing.is_empty() {
        return Err(PipelineError::Data(format!(
            "no mesh (.stl) or cloud (.xyz) in {} for subject(s): {}",
            cfg.dataset_dir.display(),
            missing.join(", ")
        )));
    }
    subjects.sort_by(|a, b| a.id.cmp(&b.id));
    let mut labels: Vec<&str> = subjects.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != 2 {
        return Err(PipelineError::Data(format!("labels must take exactly two values, found {labels:?}")));
    }
    for l in &labels {
        if *l != "risk" && *l != "no-risk" {
            warn!("label `{l}` is neither `risk` nor `no-risk`");
        }
    }
    let needs_curves = cfg.branch.branches().iter().any(|b| *b != Branch::PhCurvature);
    let mut landmarks = BTreeMap::new();
    if needs_curves {
        let path = cfg
            .landmarks_file
            .as_ref()
            .ok_or_else(|| PipelineError::Config("curve branches need `landmarks_file`".into()))?;
        if !path.is_file() {
            return Err(PipelineError::Config(format!("landmarks file {} does not exist", path.display())));
        }
        landmarks = read_landmarks_csv(path).map_err(|e| PipelineError::Data(e.to_string()))?;
        let without: Vec<&str> =
            subjects.iter().filter(|s| !landmarks.contains_key(&s.id)).map(|s| s.id.as_str()).collect();
        if !without.is_empty() {
            return Err(PipelineError::Data(format!("no landmarks for subject(s): {}", without.join(", "))));
        }
        let clouds: Vec<&str> =
            subjects.iter().filter(|s| s.path.extension().is_some_and(|e| e == "xyz")).map(|s| s.id.as_str()).collect();
        if !clouds.is_empty() {
            return Err(PipelineError::Data(format!(
                "curve branches need meshes, but these subjects only have point clouds: {}",
                clouds.join(", ")
            )));
        }
    }
    Ok(Dataset { subjects, landmarks })
}

pub(crate) fn load_mesh(s: &Subject) -> Result<TriMesh> {
    let bytes = std::fs::read(&s.path).map_err(|e| PipelineError::io(&s.path, e))?;
    parse_stl(&bytes).map_err(|e| PipelineError::stage(&s.id, "parse", e))
}

fn is_cloud(s: &Subject) -> bool {
    s.path.extension().is_some_and(|e| e == "xyz")
}

/// Downsampled curvature-valued cloud of one subject.
fn curvature_cloud(s: &Subject, cfg: &PipelineConfig, seed: u64) -> Result<PointCloud> {
    let cloud = if is_cloud(s) {
        let raw = read_xyz(&s.path).map_err(|e| PipelineError::stage(&s.id, "read", e))?;
        let values = raw
            .values()
            .ok_or_else(|| PipelineError::stage(&s.id, "read", "point cloud has no value column"))?
            .iter()
            .map(|v| v.clamp(-cfg.clamp, cfg.clamp))
            .collect();
        PointCloud::new(raw.points().to_vec(), Some(values)).map_err(|e| PipelineError::stage(&s.id, "read", e))?
    } else {
        let mesh = load_mesh(s)?;
        let k = mean_curvature(&mesh, cfg.clamp).map_err(|e| PipelineError::stage(&s.id, "curvature", e))?;
        let k = low_pass_filter(&mesh, &k, cfg.clamp).map_err(|e| PipelineError::stage(&s.id, "curvature", e))?;
        PointCloud::from_mesh_field(&mesh, &k).map_err(|e| PipelineError::stage(&s.id, "curvature", e))?
    };
    stratified_downsample(&cloud, cfg.downsample_n, seed).map_err(|e| PipelineError::stage(&s.id, "downsample", e))
}

/// Level curves of the aligned face, cut across the `y` axis of the
/// landmark frame (eye-to-eye along `x`), resampled to the configured size.
fn facial_curves(s: &Subject, lm: &Landmarks, cfg: &PipelineConfig) -> Result<FacialCurves> {
    let mesh = load_mesh(s)?;
    let aligned = landmark_align(&mesh, lm).map_err(|e| PipelineError::stage(&s.id, "align", e))?;
    let height: Vec<f64> = aligned.vertices().iter().map(|v| v.y).collect();
    let levels = level_schedule(&height, cfg.curve_count);
    let fc = extract_level_curves(&aligned, &height, &levels).map_err(|e| PipelineError::stage(&s.id, "curves", e))?;
    let curves = fc
        .curves()
        .iter()
        .map(|c| if c.kind() == cfg.curve_kind { Ok(c.clone()) } else { Curve::new(c.points().to_vec(), cfg.curve_kind) })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::shape_stage(&s.id, "curves", &e))?;
    FacialCurves::new(curves, fc.level_values().to_vec())
        .and_then(|f| f.resampled(cfg.samples_per_curve))
        .map_err(|e| PipelineError::stage(&s.id, "resample", e))
}

/// Union of curve points valued by their height below the nose tip
/// (the nose sits at `y = 0` in the landmark frame), downsampled.
fn curve_cloud(s: &Subject, fc: &FacialCurves, cfg: &PipelineConfig, seed: u64) -> Result<PointCloud> {
    let mut pts = Vec::new();
    let mut values = Vec::new();
    for c in fc.curves() {
        for p in c.points() {
            pts.push(*p);
            values.push(-p.y);
        }
    }
    let cloud = PointCloud::new(pts, Some(values)).map_err(|e| PipelineError::stage(&s.id, "curve cloud", e))?;
    stratified_downsample(&cloud, cfg.curve_downsample_n, seed).map_err(|e| PipelineError::stage(&s.id, "downsample", e))
}

struct PhResult {
    hilbert: HilbertFunction,
    barcodes: Vec<Barcode>,
}

fn ph_descriptor(id: &str, cloud: &PointCloud, t_max: f64, dims: usize, degree: usize, grid: &GridSpec) -> Result<PhResult> {
    let bf = build_bifiltration(cloud, t_max, dims).map_err(|e| PipelineError::stage(id, "bifiltration", e))?;
    let hilbert = hilbert_function(&bf, degree, grid).map_err(|e| PipelineError::stage(id, "hilbert", e))?;
    let [b0, b1] = compute_barcodes(&restrict(&bf, grid.tau_hi)).map_err(|e| PipelineError::stage(id, "barcode", e))?;
    // without triangles every cycle would look immortal
    let barcodes = if dims == 2 { vec![b0, b1] } else { vec![b0] };
    Ok(PhResult { hilbert, barcodes })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    buf
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct Manifest<'a> {
    generator: &'a str,
    config: BTreeMap<String, String>,
    /// SHA-256 of every emitted file, keyed by relative path.
    files: BTreeMap<&'a str, String>,
}

impl RunArtifacts {
    /// Writes every artifact, then `manifest.json` covering all of them.
    pub fn write(&self, cfg: &PipelineConfig) -> Result<PathBuf> {
        let dir = &self.output_dir;
        std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| PipelineError::io(&path, e))?;
        }
        let path = dir.join("manifest.json");
        std::fs::write(&path, self.manifest(cfg)).map_err(|e| PipelineError::io(&path, e))?;
        Ok(path)
    }

    pub fn manifest(&self, cfg: &PipelineConfig) -> String {
        let m = Manifest {
            generator: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")),
            config: cfg.settings(),
            files: self.files.iter().map(|(k, v)| (k.as_str(), sha256_hex(v))).collect(),
        };
        serde_json::to_string_pretty(&m).expect("plain struct serialises") + "\n"
    }
}

/// Loads the dataset, runs the configured branches and writes all artifacts.
///
/// Nothing is written unless every stage succeeds.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunArtifacts> {
    let data = load_dataset(cfg)?;
    let artifacts = compute(cfg, &data)?;
    artifacts.write(cfg)?;
    Ok(artifacts)
}

fn compute(cfg: &PipelineConfig, data: &Dataset) -> Result<RunArtifacts> {
    let branches = cfg.branch.branches();
    let ids: Vec<String> = data.subjects.iter().map(|s| s.id.clone()).collect();
    let labels: Vec<String> = data.subjects.iter().map(|s| s.label.clone()).collect();
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut descriptors: Vec<(Branch, Vec<Descriptor>)> = Vec::new();
    let mut geodesic_curves = None;
    let wants = |m: &str| cfg.metrics.iter().any(|x| x == m);

    if branches.contains(&Branch::PhCurvature) && (wants("de") || wants("dH")) {
        info!("ph-curvature: {} subjects", data.subjects.len());
        let grid = GridSpec::new((0.0, cfg.t_max), cfg.grid_nt, (-cfg.clamp, cfg.clamp), cfg.grid_ntau)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let results: Vec<PhResult> = data
            .subjects
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let cloud = curvature_cloud(s, cfg, cfg.seed.wrapping_add(i as u64))?;
                ph_descriptor(&s.id, &cloud, cfg.t_max, 1, 0, &grid)
            })
            .collect::<Result<_>>()?;
        for (s, r) in data.subjects.iter().zip(&results) {
            emit_ph(&mut files, Branch::PhCurvature, &s.id, r, cfg.t_max);
        }
        descriptors.push((Branch::PhCurvature, results.into_iter().map(|r| Descriptor::Hilbert(r.hilbert)).collect()));
    }

    let curve_branch = |b: Branch| branches.contains(&b);
    let need_curves = (curve_branch(Branch::PhCurves) && (wants("de") || wants("dH")))
        || (curve_branch(Branch::ShapeGeodesic) && wants("dg"));
    if need_curves {
        info!("extracting {} curves per subject", cfg.curve_count);
        let curves: Vec<FacialCurves> = data
            .subjects
            .par_iter()
            .map(|s| facial_curves(s, &data.landmarks[&s.id], cfg))
            .collect::<Result<_>>()?;
        for (s, fc) in data.subjects.iter().zip(&curves) {
            files.insert(format!("subjects/{}_curves.csv", s.id), write_curves_csv(fc.curves()).into_bytes());
        }
        if curve_branch(Branch::PhCurves) && (wants("de") || wants("dH")) {
            let clouds: Vec<PointCloud> = data
                .subjects
                .par_iter()
                .zip(&curves)
                .enumerate()
                .map(|(i, (s, fc))| curve_cloud(s, fc, cfg, cfg.seed.wrapping_add(i as u64)))
                .collect::<Result<_>>()?;
            let (lo, hi) = match cfg.curve_tau_range {
                TauRange::Fixed(lo, hi) => (lo, hi),
                TauRange::Auto => {
                    let all = clouds.iter().flat_map(|c| c.values().unwrap_or_default().iter().copied());
                    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                    if lo < hi { (lo, hi) } else { (lo - 0.5, lo + 0.5) }
                }
            };
            let grid = GridSpec::new((0.0, cfg.curve_t_max), cfg.grid_nt, (lo, hi), cfg.grid_ntau)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            info!("ph-curves: value grid [{lo}, {hi}]");
            let results: Vec<PhResult> = data
                .subjects
                .par_iter()
                .zip(&clouds)
                .map(|(s, c)| ph_descriptor(&s.id, c, cfg.curve_t_max, 2, 1, &grid))
                .collect::<Result<_>>()?;
            for (s, r) in data.subjects.iter().zip(&results) {
                emit_ph(&mut files, Branch::PhCurves, &s.id, r, cfg.curve_t_max);
            }
            descriptors.push((Branch::PhCurves, results.into_iter().map(|r| Descriptor::Hilbert(r.hilbert)).collect()));
        }
        if curve_branch(Branch::ShapeGeodesic) && wants("dg") {
            geodesic_curves = Some(curves);
        }
    }

    let mut matrices = Vec::new();
    for (branch, desc) in &descriptors {
        for metric in [Metric::L2, Metric::SublevelHausdorff].into_iter().filter(|m| wants(m.name())) {
            info!("{} {}: {} pairs", branch.as_str(), metric.name(), ids.len() * (ids.len() - 1) / 2);
            let dm = pairwise_matrix(desc, &metric, ids.clone(), labels.clone())
                .map_err(|e| PipelineError::Data(format!("{} {}: {e}", branch.as_str(), metric.name())))?;
            matrices.push(analyse(*branch, metric.name(), dm.sorted_by_group(), cfg)?);
        }
    }
    if let Some(curves) = geodesic_curves {
        let dm = geodesic_matrix(&curves, cfg, &ids, &labels)?;
        matrices.push(analyse(Branch::ShapeGeodesic, "dg", dm.sorted_by_group(), cfg)?);
    }
    for m in &matrices {
        emit_matrix(&mut files, m);
    }
    Ok(RunArtifacts { output_dir: cfg.output_dir.clone(), files, matrices })
}

/// Product-of-curves distance matrix. The per-curve distances are also
/// folded into a root-sum-square combination, which is only logged as a
/// diagnostic: unlike the product it is a metric, but it is not `d^g`.
fn geodesic_matrix(curves: &[FacialCurves], cfg: &PipelineConfig, ids: &[String], labels: &[String]) -> Result<DistanceMatrix> {
    let n = curves.len();
    let opts = ShapeOptions { samples: cfg.samples_per_curve, ..ShapeOptions::default() };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    info!("shape-geodesic dg: {} pairs x {} curves", pairs.len(), cfg.curve_count);
    let per_pair: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            curve_distances(&curves[i], &curves[j], &opts)
                .map_err(|e| PipelineError::shape_stage(&format!("{}/{}", ids[i], ids[j]), "shape distance", &e))
        })
        .collect::<Result<_>>()?;
    let product: Vec<f64> = per_pair.iter().map(|d| d.iter().product()).collect();
    let rss: Vec<f64> = per_pair.iter().map(|d| d.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let (mut within, mut between) = ((0.0, 0usize), (0.0, 0usize));
    for (&(i, j), r) in pairs.iter().zip(&rss) {
        let acc = if labels[i] == labels[j] { &mut within } else { &mut between };
        acc.0 += r;
        acc.1 += 1;
    }
    info!(
        "diagnostic only, not dg: root-sum-square curve combination, mean within-group {:.6}, mean between-group {:.6}",
        within.0 / within.1.max(1) as f64,
        between.0 / between.1.max(1) as f64
    );
    DistanceMatrix::from_upper(ids.to_vec(), labels.to_vec(), &product)
        .map_err(|e| PipelineError::Data(format!("shape-geodesic dg: {e}")))
}

fn analyse(branch: Branch, metric: &str, matrix: DistanceMatrix, cfg: &PipelineConfig) -> Result<MatrixResult> {
    let ctx = |e: crate::stats::StatsError| PipelineError::Data(format!("{} {metric}: {e}", branch.as_str()));
    let permutation = permutation_test(&matrix, cfg.n_perm, cfg.seed).map_err(ctx)?;
    let embedding = classical_mds(&matrix, cfg.mds_dim.min(matrix.len())).map_err(ctx)?;
    let knn = knn_classify(&matrix, cfg.knn_k, cfg.knn_holdout, cfg.seed).map_err(|e| match e {
        crate::stats::StatsError::KTooLarge { .. } => PipelineError::Config(format!("knn_k: {e}")),
        e => ctx(e),
    })?;
    info!(
        "{} {metric}: p = {:.4}, kNN accuracy = {:.3}",
        branch.as_str(),
        permutation.p_value,
        knn.accuracy
    );
    Ok(MatrixResult { branch, metric: metric.to_string(), matrix, permutation, embedding, knn })
}

fn emit_ph(files: &mut BTreeMap<String, Vec<u8>>, branch: Branch, id: &str, r: &PhResult, t_max: f64) {
    let stem = format!("subjects/{id}_{}", branch.as_str());
    files.insert(format!("{stem}_hilbert.csv"), csv_bytes(|w| write_hilbert_csv(w, &r.hilbert)));
    files.insert(format!("{stem}_hilbert.svg"), hilbert_svg(&r.hilbert).into_bytes());
    files.insert(format!("{stem}_barcode.csv"), csv_bytes(|w| write_barcode_csv(w, &r.barcodes)));
    files.insert(format!("{stem}_barcode.svg"), barcode_svg(&r.barcodes, t_max).into_bytes());
}

fn emit_matrix(files: &mut BTreeMap<String, Vec<u8>>, m: &MatrixResult) {
    let stem = m.stem();
    files.insert(format!("{stem}_matrix.csv"), csv_bytes(|w| m.matrix.write_csv(w)));
    files.insert(format!("{stem}_permutation.json"), m.permutation.to_json().into_bytes());
    files.insert(format!("{stem}_null.csv"), csv_bytes(|w| m.permutation.write_null_csv(w)));
    files.insert(format!("{stem}_mds.csv"), csv_bytes(|w| m.embedding.write_csv(w, &m.matrix)));
    files.insert(format!("{stem}_knn.json"), m.knn.to_json().into_bytes());
    files.insert(format!("{stem}_heatmap.svg"), distance_heatmap_svg(&m.matrix).into_bytes());
    files.insert(format!("{stem}_mds.svg"), mds_scatter_svg(&m.embedding, &m.matrix).into_bytes());
}
