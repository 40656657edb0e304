//! Plain-text point clouds, curve tables and landmark tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Landmarks, MeshError, PointCloud, Result};
use crate::shape::{Curve, CurveKind};
use crate::Vec3;

fn text_err(path: &Path, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Text { path: path.display().to_string(), line, message: message.into() }
}

/// Reads `x y z [value]` lines. Blank lines and `#` comments are skipped;
/// values must be present on every line or on none.
pub fn read_xyz(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut with_values: Option<bool> = None;
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| text_err(path, no + 1, format!("invalid number `{s}`"))))
            .collect::<Result<Vec<f64>>>()?;
        let has_value = match nums.len() {
            3 => false,
            4 => true,
            k => return Err(text_err(path, no + 1, format!("expected 3 or 4 columns, found {k}"))),
        };
        if *with_values.get_or_insert(has_value) != has_value {
            return Err(text_err(path, no + 1, "inconsistent column count"));
        }
        points.push(Vec3::new(nums[0], nums[1], nums[2]));
        if has_value {
            values.push(nums[3]);
        }
    }
    PointCloud::new(points, with_values.unwrap_or(false).then_some(values))
}

pub fn write_xyz(cloud: &PointCloud) -> String {
    let mut s = String::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let _ = match cloud.values() {
            Some(v) => writeln!(s, "{:.17e} {:.17e} {:.17e} {:.17e}", p.x, p.y, p.z, v[i]),
            None => writeln!(s, "{:.17e} {:.17e} {:.17e}", p.x, p.y, p.z),
        };
    }
    s
}

/// CSV `curve_index,point_index,x,y,z`.
pub fn write_curves_csv(curves: &[Curve]) -> String {
    let mut s = String::from("curve_index,point_index,x,y,z\n");
    for (c, curve) in curves.iter().enumerate() {
        for (i, p) in curve.points().iter().enumerate() {
            let _ = writeln!(s, "{c},{i},{:.17e},{:.17e},{:.17e}", p.x, p.y, p.z);
        }
    }
    s
}

/// Reads a curve table written by [`write_curves_csv`]; rows must be grouped
/// by curve and ordered by point index.
pub fn read_curves_csv(path: &Path, kind: CurveKind) -> Result<Vec<Curve>> {
    let text = std::fs::read_to_string(path)?;
    let mut groups: Vec<Vec<Vec3>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (no == 0 && line.starts_with("curve_index")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(text_err(path, no + 1, format!("expected 5 columns, found {}", cols.len())));
        }
        let c: usize = cols[0].parse().map_err(|_| text_err(path, no + 1, "invalid curve index"))?;
        let i: usize = cols[1].parse().map_err(|_| text_err(path, no + 1, "invalid point index"))?;
        let xyz = cols[2..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| text_err(path, no + 1, format!("invalid number `{v}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if c == groups.len() {
            groups.push(Vec::new());
        }
        if c + 1 != groups.len() || i != groups[c].len() {
            return Err(text_err(path, no + 1, "rows out of order"));
        }
        groups[c].push(Vec3::new(xyz[0], xyz[1], xyz[2]));
    }
    groups.into_iter().map(|pts| Ok(Curve::new(pts, kind)?)).collect()
}

/// Parses `subject_id,nose_idx,left_eye_idx,right_eye_idx` rows (header optional).
pub fn read_landmarks_csv(path: &Path) -> Result<BTreeMap<String, Landmarks>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(text_err(path, no + 1, format!("expected 4 columns, found {}", cols.len())));
        }
        let parsed: std::result::Result<Vec<usize>, _> = cols[1..].iter().map(|c| c.parse::<usize>()).collect();
        match parsed {
            Ok(idx) => {
                if out.insert(cols[0].to_string(), Landmarks::new(idx[0], idx[1], idx[2])).is_some() {
                    return Err(text_err(path, no + 1, format!("duplicate subject `{}`", cols[0])));
                }
            }
            Err(_) if no == 0 => continue,
            Err(e) => return Err(text_err(path, no + 1, e.to_string())),
        }
    }
    Ok(out)
}
