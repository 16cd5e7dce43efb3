//! Discrete unknowns indexed by (entity, time level), levels `0..=N`.
//! The value of level `n` is attached to `[t_n, t_{n+1})`.

use std::fmt::Write as _;

use crate::error::{FvError, Result};
use crate::geometry::io::fmt_f64;

/// Values `q_P^n` on primal cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScalarField {
    n_cells: usize,
    values: Vec<f64>,
}

impl CellScalarField {
    pub fn zeros(n_cells: usize, n_levels: usize) -> Self {
        Self { n_cells, values: vec![0.0; n_cells * n_levels] }
    }

    pub fn from_levels(levels: Vec<Vec<f64>>) -> Result<Self> {
        let n_cells = levels.first().map_or(0, Vec::len);
        if levels.iter().any(|l| l.len() != n_cells) {
            return Err(FvError::Mismatch("levels have different lengths".into()));
        }
        let values: Vec<f64> = levels.into_iter().flatten().collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FvError::Mismatch(format!("non-finite value at cell {} level {}", i % n_cells.max(1), i / n_cells.max(1))));
        }
        Ok(Self { n_cells, values })
    }

    pub fn from_fn<F: Fn(usize, usize) -> f64>(n_cells: usize, n_levels: usize, f: F) -> Result<Self> {
        Self::from_levels((0..n_levels).map(|n| (0..n_cells).map(|p| f(p, n)).collect()).collect())
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_levels(&self) -> usize {
        if self.n_cells == 0 {
            0
        } else {
            self.values.len() / self.n_cells
        }
    }

    pub fn get(&self, p: usize, n: usize) -> f64 {
        self.values[n * self.n_cells + p]
    }

    pub fn set(&mut self, p: usize, n: usize, v: f64) {
        self.values[n * self.n_cells + p] = v;
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[n * self.n_cells..(n + 1) * self.n_cells]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.n_cells..(n + 1) * self.n_cells]
    }

    /// Pointwise image `β(q)`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self { n_cells: self.n_cells, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// (min, max) over all values.
    pub fn range(&self) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.map(|v| lambda * v)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cell,level,value\n");
        for n in 0..self.n_levels() {
            for p in 0..self.n_cells {
                writeln!(s, "{p},{n},{}", fmt_f64(self.get(p, n))).unwrap();
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_rows(text, 3)?;
        let n_cells = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let n_levels = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut out = Self::zeros(n_cells, n_levels);
        let mut seen = vec![false; n_cells * n_levels];
        for (p, n, v) in rows {
            out.set(p, n, v[0]);
            seen[n * n_cells + p] = true;
        }
        check_complete(&seen)?;
        Ok(out)
    }
}

/// Full vectors `v_ζ^n` on faces (RT layout).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceVectorField {
    n_faces: usize,
    values: Vec<[f64; 2]>,
}

impl FaceVectorField {
    pub fn from_fn<F: Fn(usize, usize) -> [f64; 2]>(n_faces: usize, n_levels: usize, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(n_faces * n_levels);
        for n in 0..n_levels {
            for z in 0..n_faces {
                let v = f(z, n);
                if !(v[0].is_finite() && v[1].is_finite()) {
                    return Err(FvError::Mismatch(format!("non-finite velocity at face {z} level {n}")));
                }
                values.push(v);
            }
        }
        Ok(Self { n_faces, values })
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn n_levels(&self) -> usize {
        if self.n_faces == 0 {
            0
        } else {
            self.values.len() / self.n_faces
        }
    }

    pub fn get(&self, z: usize, n: usize) -> [f64; 2] {
        self.values[n * self.n_faces + z]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max((v[0] * v[0] + v[1] * v[1]).sqrt()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("face,level,v1,v2\n");
        for n in 0..self.n_levels() {
            for z in 0..self.n_faces {
                let v = self.get(z, n);
                writeln!(s, "{z},{n},{},{}", fmt_f64(v[0]), fmt_f64(v[1])).unwrap();
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_rows(text, 4)?;
        let n_faces = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let n_levels = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut values = vec![[0.0; 2]; n_faces * n_levels];
        let mut seen = vec![false; n_faces * n_levels];
        for (z, n, v) in rows {
            values[n * n_faces + z] = [v[0], v[1]];
            seen[n * n_faces + z] = true;
        }
        check_complete(&seen)?;
        Ok(Self { n_faces, values })
    }
}

/// Normal components `v_ζ^n` on faces (MAC layout); the family of `ζ` fixes the component.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceScalarField {
    n_faces: usize,
    values: Vec<f64>,
}

impl FaceScalarField {
    pub fn from_fn<F: Fn(usize, usize) -> f64>(n_faces: usize, n_levels: usize, f: F) -> Result<Self> {
        let inner = CellScalarField::from_fn(n_faces, n_levels, f)?;
        Ok(Self { n_faces, values: inner.values })
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn n_levels(&self) -> usize {
        if self.n_faces == 0 {
            0
        } else {
            self.values.len() / self.n_faces
        }
    }

    pub fn get(&self, z: usize, n: usize) -> f64 {
        self.values[n * self.n_faces + z]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_csv(&self) -> String {
        CellScalarField { n_cells: self.n_faces, values: self.values.clone() }.to_csv().replacen("cell", "face", 1)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let inner = CellScalarField::from_csv(text)?;
        Ok(Self { n_faces: inner.n_cells, values: inner.values })
    }
}

type Row = (usize, usize, Vec<f64>);

fn parse_rows(text: &str, width: usize) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |msg: &str| FvError::Parse { line: i + 1, msg: msg.to_owned() };
        if f.len() != width {
            return Err(bad(&format!("expected {width} fields")));
        }
        let id = f[0].parse().map_err(|_| bad("bad entity id"))?;
        let lvl = f[1].parse().map_err(|_| bad("bad level"))?;
        let vals = f[2..].iter().map(|s| s.parse::<f64>().map_err(|_| bad("bad value"))).collect::<Result<Vec<_>>>()?;
        rows.push((id, lvl, vals));
    }
    Ok(rows)
}

fn check_complete(seen: &[bool]) -> Result<()> {
    match seen.iter().position(|s| !s) {
        Some(i) => Err(FvError::Parse { line: 0, msg: format!("missing record #{i}") }),
        None => Ok(()),
    }
}
