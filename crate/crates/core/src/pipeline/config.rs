use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{PipelineError, Result};
use crate::shape::CurveKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    PhCurvature,
    PhCurves,
    ShapeGeodesic,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::PhCurvature, Branch::PhCurves, Branch::ShapeGeodesic];

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::PhCurvature => "ph-curvature",
            Branch::PhCurves => "ph-curves",
            Branch::ShapeGeodesic => "shape-geodesic",
        }
    }
}

/// `branch` setting: one branch or all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSel {
    One(Branch),
    All,
}

impl BranchSel {
    pub fn branches(self) -> Vec<Branch> {
        match self {
            BranchSel::One(b) => vec![b],
            BranchSel::All => Branch::ALL.to_vec(),
        }
    }
}

impl FromStr for BranchSel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "all" => Ok(BranchSel::All),
            "ph-curvature" => Ok(BranchSel::One(Branch::PhCurvature)),
            "ph-curves" => Ok(BranchSel::One(Branch::PhCurves)),
            "shape-geodesic" => Ok(BranchSel::One(Branch::ShapeGeodesic)),
            other => Err(format!(
                "unknown branch `{other}` (expected ph-curvature, ph-curves, shape-geodesic or all)"
            )),
        }
    }
}

impl fmt::Display for BranchSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchSel::All => f.write_str("all"),
            BranchSel::One(b) => f.write_str(b.as_str()),
        }
    }
}

/// Value-axis range of the curve-branch Hilbert grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRange {
    /// Span of the per-point values over all subjects.
    Auto,
    Fixed(f64, f64),
}

/// Run description read from a flat `key = value` file.
///
/// Relative paths are resolved against the directory holding the file.
/// Keys and defaults:
///
/// | key | default | meaning |
/// |---|---|---|
/// | `dataset_dir` | required | directory of `<subject>.stl` (or `.xyz`) files |
/// | `labels_file` | required | CSV `subject_id,label` |
/// | `landmarks_file` | required for curve branches | CSV `subject_id,nose_idx,left_eye_idx,right_eye_idx` |
/// | `output_dir` | required | where artifacts are written |
/// | `branch` | `all` | `ph-curvature`, `ph-curves`, `shape-geodesic` or `all` |
/// | `metrics` | `de,dH,dg` | subset of metrics to emit |
/// | `seed` | `0` | base seed for every random step |
/// | `clamp` | `0.5` | curvature clamp |
/// | `downsample_n` | `300` | points kept per curvature cloud |
/// | `t_max` | `40` | Rips scale bound for the curvature branch |
/// | `grid_nt`, `grid_ntau` | `20`, `20` | Hilbert grid resolution |
/// | `curve_count` | `20` | level curves per face |
/// | `samples_per_curve` | `128` | samples per curve for shape distances |
/// | `curve_kind` | `open` | `open` or `closed` |
/// | `curve_downsample_n` | `200` | points kept from the union of curves |
/// | `curve_t_max` | `20` | Rips scale bound for the curve branch |
/// | `curve_tau_range` | `auto` | `auto` or `lo,hi` |
/// | `n_perm` | `999` | permutation replicates |
/// | `mds_dim` | `2` | MDS target dimension |
/// | `knn_k`, `knn_holdout` | `3`, `0.2` | nearest-neighbour settings |
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dataset_dir: PathBuf,
    pub labels_file: PathBuf,
    pub landmarks_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub branch: BranchSel,
    pub metrics: Vec<String>,
    pub seed: u64,
    pub clamp: f64,
    pub downsample_n: usize,
    pub t_max: f64,
    pub grid_nt: usize,
    pub grid_ntau: usize,
    pub curve_count: usize,
    pub samples_per_curve: usize,
    pub curve_kind: CurveKind,
    pub curve_downsample_n: usize,
    pub curve_t_max: f64,
    pub curve_tau_range: TauRange,
    pub n_perm: usize,
    pub mds_dim: usize,
    pub knn_k: usize,
    pub knn_holdout: f64,
}

const KNOWN_METRICS: [&str; 3] = ["de", "dH", "dg"];

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected `key = value`", no + 1)))?;
            let key = k.trim().to_string();
            if kv.insert(key.clone(), (no + 1, v.trim().to_string())).is_some() {
                return Err(PipelineError::Config(format!("line {}: duplicate key `{key}`", no + 1)));
            }
        }
        let mut take = |key: &str| kv.remove(key);
        let path = |v: Option<(usize, String)>, key: &str| -> Result<PathBuf> {
            let (_, v) = v.ok_or_else(|| PipelineError::Config(format!("missing required key `{key}`")))?;
            Ok(base.join(v))
        };
        fn num<T: FromStr>(v: Option<(usize, String)>, key: &str, default: T) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            match v {
                None => Ok(default),
                Some((line, s)) => s
                    .parse()
                    .map_err(|e| PipelineError::Config(format!("line {line}: `{key}` = `{s}`: {e}"))),
            }
        }
        let cfg = PipelineConfig {
            dataset_dir: path(take("dataset_dir"), "dataset_dir")?,
            labels_file: path(take("labels_file"), "labels_file")?,
            landmarks_file: take("landmarks_file").map(|(_, v)| base.join(v)),
            output_dir: path(take("output_dir"), "output_dir")?,
            branch: num(take("branch"), "branch", BranchSel::All)?,
            metrics: match take("metrics") {
                None => KNOWN_METRICS.iter().map(|s| s.to_string()).collect(),
                Some((_, v)) => v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            },
            seed: num(take("seed"), "seed", 0)?,
            clamp: num(take("clamp"), "clamp", 0.5)?,
            downsample_n: num(take("downsample_n"), "downsample_n", 300)?,
            t_max: num(take("t_max"), "t_max", 40.0)?,
            grid_nt: num(take("grid_nt"), "grid_nt", 20)?,
            grid_ntau: num(take("grid_ntau"), "grid_ntau", 20)?,
            curve_count: num(take("curve_count"), "curve_count", 20)?,
            samples_per_curve: num(take("samples_per_curve"), "samples_per_curve", 128)?,
            curve_kind: match take("curve_kind") {
                None => CurveKind::Open,
                Some((_, v)) if v == "open" => CurveKind::Open,
                Some((_, v)) if v == "closed" => CurveKind::Closed,
                Some((line, v)) => {
                    return Err(PipelineError::Config(format!("line {line}: curve_kind `{v}` is not open|closed")))
                }
            },
            curve_downsample_n: num(take("curve_downsample_n"), "curve_downsample_n", 200)?,
            curve_t_max: num(take("curve_t_max"), "curve_t_max", 20.0)?,
            curve_tau_range: match take("curve_tau_range") {
                None => TauRange::Auto,
                Some((_, v)) if v == "auto" => TauRange::Auto,
                Some((line, v)) => {
                    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                    match parts.as_slice() {
                        [a, b] => match (a.parse::<f64>(), b.parse::<f64>()) {
                            (Ok(lo), Ok(hi)) => TauRange::Fixed(lo, hi),
                            _ => {
                                return Err(PipelineError::Config(format!(
                                    "line {line}: curve_tau_range `{v}` is not `lo,hi`"
                                )))
                            }
                        },
                        _ => {
                            return Err(PipelineError::Config(format!(
                                "line {line}: curve_tau_range `{v}` is not `auto` or `lo,hi`"
                            )))
                        }
                    }
                }
            },
            n_perm: num(take("n_perm"), "n_perm", 999)?,
            mds_dim: num(take("mds_dim"), "mds_dim", 2)?,
            knn_k: num(take("knn_k"), "knn_k", 3)?,
            knn_holdout: num(take("knn_holdout"), "knn_holdout", 0.2)?,
        };
        if let Some((key, (line, _))) = kv.into_iter().next() {
            return Err(PipelineError::Config(format!("line {line}: unknown key `{key}`")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::Config(m));
        for (name, v) in [
            ("downsample_n", self.downsample_n),
            ("grid_nt", self.grid_nt),
            ("grid_ntau", self.grid_ntau),
            ("curve_count", self.curve_count),
            ("curve_downsample_n", self.curve_downsample_n),
            ("n_perm", self.n_perm),
            ("mds_dim", self.mds_dim),
            ("knn_k", self.knn_k),
        ] {
            if v == 0 {
                return bad(format!("`{name}` must be positive"));
            }
        }
        for (name, v) in [("clamp", self.clamp), ("t_max", self.t_max), ("curve_t_max", self.curve_t_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("`{name}` must be positive, got {v}"));
            }
        }
        if self.samples_per_curve < 3 {
            return bad(format!("`samples_per_curve` must be at least 3, got {}", self.samples_per_curve));
        }
        if !(self.knn_holdout > 0.0 && self.knn_holdout < 1.0) {
            return bad(format!("`knn_holdout` must lie in (0, 1), got {}", self.knn_holdout));
        }
        if self.knn_k % 2 == 0 {
            return bad(format!("`knn_k` must be odd, got {}", self.knn_k));
        }
        if let TauRange::Fixed(lo, hi) = self.curve_tau_range {
            if !(lo < hi) {
                return bad(format!("`curve_tau_range` needs lo < hi, got {lo},{hi}"));
            }
        }
        if self.metrics.is_empty() {
            return bad("`metrics` is empty".into());
        }
        for m in &self.metrics {
            if !KNOWN_METRICS.contains(&m.as_str()) {
                return bad(format!("unknown metric `{m}` (expected de, dH or dg)"));
            }
        }
        Ok(())
    }

    /// Config echo with one `key = value` per line, in a fixed order.
    pub fn to_text(&self) -> String {
        let tau = match self.curve_tau_range {
            TauRange::Auto => "auto".to_string(),
            TauRange::Fixed(lo, hi) => format!("{lo},{hi}"),
        };
        let mut out = vec![
            ("dataset_dir", self.dataset_dir.display().to_string()),
            ("labels_file", self.labels_file.display().to_string()),
        ];
        if let Some(l) = &self.landmarks_file {
            out.push(("landmarks_file", l.display().to_string()));
        }
        out.extend([
            ("output_dir", self.output_dir.display().to_string()),
            ("branch", self.branch.to_string()),
            ("metrics", self.metrics.join(",")),
            ("seed", self.seed.to_string()),
            ("clamp", self.clamp.to_string()),
            ("downsample_n", self.downsample_n.to_string()),
            ("t_max", self.t_max.to_string()),
            ("grid_nt", self.grid_nt.to_string()),
            ("grid_ntau", self.grid_ntau.to_string()),
            ("curve_count", self.curve_count.to_string()),
            ("samples_per_curve", self.samples_per_curve.to_string()),
            ("curve_kind", self.curve_kind.as_str().to_string()),
            ("curve_downsample_n", self.curve_downsample_n.to_string()),
            ("curve_t_max", self.curve_t_max.to_string()),
            ("curve_tau_range", tau),
            ("n_perm", self.n_perm.to_string()),
            ("mds_dim", self.mds_dim.to_string()),
            ("knn_k", self.knn_k.to_string()),
            ("knn_holdout", self.knn_holdout.to_string()),
        ]);
        out.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Settings that affect results, for the run manifest (paths excluded).
    pub(crate) fn settings(&self) -> BTreeMap<String, String> {
        self.to_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .filter(|(k, _)| !k.ends_with("_dir") && !k.ends_with("_file"))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}
