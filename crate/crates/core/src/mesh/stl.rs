//! ASCII and binary STL reading with vertex welding.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{MeshError, Result, TriMesh};
use crate::Vec3;

/// Vertices closer than this (mm) are merged when reading STL.
pub const WELD_TOLERANCE: f64 = 1e-6;

const HEADER_LEN: usize = 80;
const FACET_LEN: usize = 50;

/// Parses ASCII or binary STL bytes into a welded, indexed mesh.
///
/// A file is read as binary when its length matches the facet count stored
/// at byte 80; otherwise a leading `solid` keyword selects the ASCII reader.
pub fn parse_stl(bytes: &[u8]) -> Result<TriMesh> {
    let binary_sized = bytes.len() >= HEADER_LEN + 4 && {
        let n = facet_count(bytes) as usize;
        HEADER_LEN + 4 + n * FACET_LEN == bytes.len()
    };
    let looks_ascii = bytes.trim_ascii_start().starts_with(b"solid");
    let triangles = if !binary_sized && looks_ascii {
        parse_ascii(bytes)?
    } else {
        parse_binary(bytes)?
    };
    weld(&triangles)
}

fn facet_count(bytes: &[u8]) -> u32 {
    u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap())
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(MeshError::Parse {
            offset: bytes.len(),
            message: "file shorter than the 84-byte binary header".into(),
        });
    }
    let n = facet_count(bytes) as usize;
    let mut triangles = Vec::with_capacity(n);
    for k in 0..n {
        let start = HEADER_LEN + 4 + k * FACET_LEN;
        if start + FACET_LEN > bytes.len() {
            return Err(MeshError::Parse {
                offset: start,
                message: format!("truncated body: header declares {n} facets, found {k}"),
            });
        }
        let rec = &bytes[start..start + FACET_LEN];
        let read = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap()) as f64;
        // skip the 3 normal floats
        let tri = [0, 1, 2].map(|v| Vec3::new(read(3 + 3 * v), read(4 + 3 * v), read(5 + 3 * v)));
        if !tri.iter().all(|p| p.iter().all(|c| c.is_finite())) {
            return Err(MeshError::Parse { offset: start, message: "non-finite coordinate".into() });
        }
        triangles.push(tri);
    }
    Ok(triangles)
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let tok = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or("\u{fffd}");
        Some((start, tok))
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        match self.next() {
            Some((_, t)) if t == word => Ok(()),
            Some((off, t)) => Err(MeshError::Parse { offset: off, message: format!("expected `{word}`, found `{t}`") }),
            None => Err(self.eof(word)),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.next() {
            Some((off, t)) => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(MeshError::Parse { offset: off, message: format!("invalid number `{t}`") }),
            },
            None => Err(self.eof("number")),
        }
    }

    fn eof(&self, wanted: &str) -> MeshError {
        MeshError::Parse { offset: self.bytes.len(), message: format!("unexpected end of file, expected {wanted}") }
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<Vec<[Vec3; 3]>> {
    let mut tok = Tokens { bytes, pos: 0 };
    tok.expect("solid")?;
    // solid name may span several tokens
    let mut triangles = Vec::new();
    loop {
        let Some((_, t)) = tok.next() else {
            return Err(tok.eof("`endsolid`"));
        };
        match t {
            "facet" => break,
            "endsolid" => return Ok(triangles),
            _ => continue,
        }
    }
    loop {
        tok.expect("normal")?;
        for _ in 0..3 {
            tok.number()?;
        }
        tok.expect("outer")?;
        tok.expect("loop")?;
        let mut tri = [Vec3::zeros(); 3];
        for p in &mut tri {
            tok.expect("vertex")?;
            *p = Vec3::new(tok.number()?, tok.number()?, tok.number()?);
        }
        tok.expect("endloop")?;
        tok.expect("endfacet")?;
        triangles.push(tri);
        match tok.next() {
            Some((_, "facet")) => continue,
            Some((_, "endsolid")) => return Ok(triangles),
            Some((off, t)) => {
                return Err(MeshError::Parse { offset: off, message: format!("expected `facet` or `endsolid`, found `{t}`") })
            }
            None => return Err(tok.eof("`endsolid`")),
        }
    }
}

/// Merges vertices within [`WELD_TOLERANCE`] and indexes the triangle soup.
pub(crate) fn weld(triangles: &[[Vec3; 3]]) -> Result<TriMesh> {
    let cell = |c: f64| (c / WELD_TOLERANCE).floor() as i64;
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces = Vec::with_capacity(triangles.len());
    for tri in triangles {
        let mut face = [0usize; 3];
        for (slot, p) in face.iter_mut().zip(tri) {
            let key = [cell(p.x), cell(p.y), cell(p.z)];
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(ids) = grid.get(&[key[0] + dx, key[1] + dy, key[2] + dz]) {
                            if let Some(&id) = ids.iter().find(|&&id| (vertices[id] - p).norm() <= WELD_TOLERANCE) {
                                found = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            *slot = found.unwrap_or_else(|| {
                vertices.push(*p);
                grid.entry(key).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
        }
        faces.push(face);
    }
    TriMesh::new(vertices, faces)
}

fn face_normal(mesh: &TriMesh, f: &[usize; 3]) -> Vec3 {
    let v = mesh.vertices();
    let n = (v[f[1]] - v[f[0]]).cross(&(v[f[2]] - v[f[0]]));
    let len = n.norm();
    if len > 0.0 {
        n / len
    } else {
        n
    }
}

/// Serialises the mesh as little-endian binary STL.
pub fn write_stl_binary(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + FACET_LEN * mesh.face_count());
    let mut header = [0u8; HEADER_LEN];
    let tag = b"facetopo binary STL";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.face_count() as u32).to_le_bytes());
    for f in mesh.faces() {
        let n = face_normal(mesh, f);
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for &vi in f {
            for c in mesh.vertices()[vi].iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Serialises the mesh as ASCII STL.
pub fn write_stl_ascii(mesh: &TriMesh, name: &str) -> String {
    let mut s = format!("solid {name}\n");
    for f in mesh.faces() {
        let n = face_normal(mesh, f);
        let _ = writeln!(s, "  facet normal {:e} {:e} {:e}", n.x, n.y, n.z);
        s.push_str("    outer loop\n");
        for &vi in f {
            let p = mesh.vertices()[vi];
            let _ = writeln!(s, "      vertex {:e} {:e} {:e}", p.x, p.y, p.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    s
}
