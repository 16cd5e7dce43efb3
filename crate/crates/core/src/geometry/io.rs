//! Plain-text mesh format.
//!
//! ```text
//! fvlab-mesh 1
//! dim <d>
//! domain <lo0> <lo1> <hi0> <hi1>
//! vertices <nv>
//! <x> <y>
//! cells <nc>
//! <k> <v_0> … <v_{k-1}>
//! faces <nf>
//! <v0> <v1> <left> <right|-1> <nx> <ny>
//! ```
//! Floats are written with 17 significant digits so a round trip is exact.

use std::fmt::Write as _;

use crate::error::{FvError, Result};

use super::mesh::{BoxDomain, FaceRecord, Point, PrimalMesh};

/// `{:.16e}` prints 17 significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_mesh(mesh: &PrimalMesh) -> String {
    let mut s = String::new();
    let d = mesh.domain();
    writeln!(s, "fvlab-mesh 1").unwrap();
    writeln!(s, "dim {}", mesh.dim()).unwrap();
    writeln!(s, "domain {} {} {} {}", fmt_f64(d.lo[0]), fmt_f64(d.lo[1]), fmt_f64(d.hi[0]), fmt_f64(d.hi[1])).unwrap();
    writeln!(s, "vertices {}", mesh.vertices().len()).unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{} {}", fmt_f64(v[0]), fmt_f64(v[1])).unwrap();
    }
    writeln!(s, "cells {}", mesh.n_cells()).unwrap();
    for c in mesh.cells() {
        let ids: Vec<String> = c.vertices.iter().map(|v| v.to_string()).collect();
        writeln!(s, "{} {}", c.vertices.len(), ids.join(" ")).unwrap();
    }
    writeln!(s, "faces {}", mesh.n_faces()).unwrap();
    for f in mesh.faces() {
        let right = f.right.map_or(-1, |q| q as i64);
        writeln!(
            s,
            "{} {} {} {} {} {}",
            f.vertices[0],
            f.vertices[1],
            f.left,
            right,
            fmt_f64(f.normal[0]),
            fmt_f64(f.normal[1])
        )
        .unwrap();
    }
    s
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<(usize, Vec<&'a str>)> {
        loop {
            let (i, line) = self.it.next().ok_or(FvError::Parse { line: 0, msg: "unexpected end of file".into() })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok((i + 1, line.split_whitespace().collect()));
        }
    }

    fn header(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (ln, f) = self.next_fields()?;
        if f.first() != Some(&key) {
            return Err(FvError::Parse { line: ln, msg: format!("expected '{key}'") });
        }
        Ok((ln, f[1..].to_vec()))
    }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| FvError::Parse { line, msg: format!("cannot parse '{s}'") })
}

fn count(line: usize, f: &[&str]) -> Result<usize> {
    match f {
        [n] => num(line, n),
        _ => Err(FvError::Parse { line, msg: "expected a single count".into() }),
    }
}

/// Parses the mesh format. Normals and adjacency are taken from the file, so a
/// corrupted face table is detected by [`PrimalMesh::check_identities`].
pub fn read_mesh(text: &str) -> Result<PrimalMesh> {
    let mut lines = Lines { it: text.lines().enumerate() };
    let (ln, magic) = lines.next_fields()?;
    if magic != ["fvlab-mesh", "1"] {
        return Err(FvError::Parse { line: ln, msg: "missing 'fvlab-mesh 1' header".into() });
    }
    let (ln, d) = lines.header("dim")?;
    let dim = count(ln, &d)?;
    let (ln, dom) = lines.header("domain")?;
    if dom.len() != 4 {
        return Err(FvError::Parse { line: ln, msg: "domain needs 4 numbers".into() });
    }
    let domain = BoxDomain::new([num(ln, dom[0])?, num(ln, dom[1])?], [num(ln, dom[2])?, num(ln, dom[3])?]);
    let (ln, nv) = lines.header("vertices")?;
    let nv = count(ln, &nv)?;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, f) = lines.next_fields()?;
        if f.len() != 2 {
            return Err(FvError::Parse { line: ln, msg: "vertex needs 2 coordinates".into() });
        }
        vertices.push([num(ln, f[0])?, num(ln, f[1])?]);
    }
    let (ln, nc) = lines.header("cells")?;
    let nc = count(ln, &nc)?;
    let mut loops = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, f) = lines.next_fields()?;
        let k: usize = num(ln, f.first().copied().unwrap_or(""))?;
        if f.len() != k + 1 {
            return Err(FvError::Parse { line: ln, msg: format!("cell declares {k} vertices") });
        }
        loops.push(f[1..].iter().map(|s| num(ln, s)).collect::<Result<Vec<usize>>>()?);
    }
    let (ln, nf) = lines.header("faces")?;
    let nf = count(ln, &nf)?;
    let mut records = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, f) = lines.next_fields()?;
        if f.len() != 6 {
            return Err(FvError::Parse { line: ln, msg: "face record needs 6 fields".into() });
        }
        let right: i64 = num(ln, f[3])?;
        records.push(FaceRecord {
            vertices: [num(ln, f[0])?, num(ln, f[1])?],
            left: num(ln, f[2])?,
            right: (right >= 0).then_some(right as usize),
            normal: [num(ln, f[4])?, num(ln, f[5])?],
        });
    }
    PrimalMesh::from_tables(dim, domain, vertices, loops, records)
}
