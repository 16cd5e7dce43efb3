//! Space-time translate functionals of a cell field.

use crate::error::{FvError, Result};
use crate::exec::pairwise_sum;
use crate::fields::discrete::CellScalarField;
use crate::geometry::mesh::diameter;
use crate::geometry::{PrimalMesh, TimeGrid};

/// Face/step form: `ω_σ` per face (read on interior faces only) and
/// `δ_{n+1/2}` per interior knot `n = 0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceStepWeights {
    pub face: Vec<f64>,
    pub step: Vec<f64>,
}

impl FaceStepWeights {
    /// `ω_σ = θ min(|K|, |L|)` and `δ_{n+1/2} = min(δt_n, δt_{n+1})`.
    pub fn min_measure(mesh: &PrimalMesh, grid: &TimeGrid, theta: f64) -> Self {
        let face = mesh
            .faces()
            .iter()
            .map(|f| match f.right {
                Some(r) => theta * mesh.cell(f.left).measure.min(mesh.cell(r).measure),
                None => 0.0,
            })
            .collect();
        let step = (0..grid.n_steps().saturating_sub(1)).map(|n| grid.step(n).min(grid.step(n + 1))).collect();
        Self { face, step }
    }

    fn validate(&self, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<()> {
        if self.face.len() != mesh.n_faces() || self.step.len() != grid.n_steps().saturating_sub(1) {
            return Err(FvError::Mismatch("translate weights do not match the discretisation".into()));
        }
        check_weights(self.face.iter().chain(self.step.iter()))
    }
}

/// Generalised form: cell pairs `S_x` with `ω_{K,L}` and level pairs `S_t`
/// (levels `< N`) with `δ_{p,q}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairWeights {
    pub space: Vec<(usize, usize, f64)>,
    pub time: Vec<(usize, usize, f64)>,
}

impl PairWeights {
    /// Interior faces (in face order) and consecutive levels.
    pub fn from_face_step(mesh: &PrimalMesh, w: &FaceStepWeights) -> Self {
        let space = mesh
            .faces()
            .iter()
            .enumerate()
            .filter_map(|(z, f)| f.right.map(|r| (f.left, r, w.face[z])))
            .collect();
        let time = w.step.iter().enumerate().map(|(n, d)| (n, n + 1, *d)).collect();
        Self { space, time }
    }

    fn validate(&self, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<()> {
        for &(k, l, _) in &self.space {
            if k >= mesh.n_cells() || l >= mesh.n_cells() || k == l {
                return Err(FvError::Mismatch(format!("invalid cell pair ({k}, {l})")));
            }
        }
        for &(p, q, _) in &self.time {
            if p >= grid.n_steps() || q >= grid.n_steps() || p == q {
                return Err(FvError::Mismatch(format!("invalid level pair ({p}, {q})")));
            }
        }
        check_weights(self.space.iter().chain(self.time.iter()).map(|e| &e.2))
    }
}

fn check_weights<'a>(ws: impl Iterator<Item = &'a f64>) -> Result<()> {
    for (i, w) in ws.enumerate() {
        if !(*w >= 0.0) || !w.is_finite() {
            return Err(FvError::NegativeWeight { index: i, value: *w });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslateValue {
    pub value: f64,
    pub theta_m: f64,
    pub theta_t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralTranslateValue {
    pub value: f64,
    pub theta_m: f64,
    pub theta_t: f64,
    /// `𝔡(M)`: largest `𝔡({K, L})` over `S_x`.
    pub gap_space: f64,
    /// `𝔡(T)`: largest `𝔡({p, q})` over `S_t`.
    pub gap_time: f64,
}

fn space_part(u: &CellScalarField, n: usize, pairs: impl Iterator<Item = (usize, usize, f64)>) -> f64 {
    let terms: Vec<f64> = pairs.map(|(k, l, w)| w * (u.get(k, n) - u.get(l, n)).abs()).collect();
    pairwise_sum(&terms)
}

fn time_part(u: &CellScalarField, mesh: &PrimalMesh, p: usize, q: usize) -> f64 {
    let terms: Vec<f64> = (0..mesh.n_cells()).map(|k| mesh.cell(k).measure * (u.get(k, p) - u.get(k, q)).abs()).collect();
    pairwise_sum(&terms)
}

/// `Σ_n δt_n Σ_σ ω_σ |u_K^n − u_L^n| + Σ_n δ_{n+1/2} Σ_K |K| |u_K^{n+1} − u_K^n|`.
pub fn translate_functional(
    u: &CellScalarField,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
    w: &FaceStepWeights,
) -> Result<TranslateValue> {
    w.validate(mesh, grid)?;
    let mut value = 0.0;
    for n in 0..grid.n_steps() {
        let pairs = mesh.faces().iter().enumerate().filter_map(|(z, f)| f.right.map(|r| (f.left, r, w.face[z])));
        value += grid.step(n) * space_part(u, n, pairs);
    }
    for (n, d) in w.step.iter().enumerate() {
        value += d * time_part(u, mesh, n, n + 1);
    }
    let mut theta_m: f64 = 0.0;
    for (z, f) in mesh.faces().iter().enumerate() {
        if let Some(r) = f.right {
            theta_m = theta_m.max(w.face[z] / mesh.cell(f.left).measure).max(w.face[z] / mesh.cell(r).measure);
        }
    }
    let mut theta_t: f64 = 0.0;
    for (n, d) in w.step.iter().enumerate() {
        theta_t = theta_t.max(d / grid.step(n)).max(d / grid.step(n + 1));
    }
    Ok(TranslateValue { value, theta_m, theta_t })
}

/// Generalised functional over arbitrary pair sets, with `θ_M`, `θ_T` and the
/// gap metrics. The space part of level `n` is weighted by `δt_n`, so the
/// face/step specialisation reproduces [`translate_functional`] exactly.
pub fn translate_functional_general(
    u: &CellScalarField,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
    w: &PairWeights,
) -> Result<GeneralTranslateValue> {
    w.validate(mesh, grid)?;
    let mut value = 0.0;
    for n in 0..grid.n_steps() {
        value += grid.step(n) * space_part(u, n, w.space.iter().copied());
    }
    for &(p, q, d) in &w.time {
        value += d * time_part(u, mesh, p, q);
    }
    let mut per_cell = vec![0.0; mesh.n_cells()];
    for &(k, l, om) in &w.space {
        per_cell[k] += om;
        per_cell[l] += om;
    }
    let theta_m = per_cell.iter().enumerate().fold(0.0f64, |m, (k, s)| m.max(s / mesh.cell(k).measure));
    let mut per_level = vec![0.0; grid.n_steps()];
    for &(p, q, d) in &w.time {
        per_level[p] += d;
        per_level[q] += d;
    }
    let theta_t = per_level.iter().enumerate().fold(0.0f64, |m, (n, s)| m.max(s / grid.step(n)));
    let gap_space = w.space.iter().fold(0.0f64, |m, &(k, l, _)| m.max(pair_gap(mesh, k, l)));
    let gap_time = w.time.iter().fold(0.0f64, |m, &(p, q, _)| {
        let (a, b) = (p.min(q), p.max(q));
        m.max(grid.t(b + 1) - grid.t(a))
    });
    Ok(GeneralTranslateValue { value, theta_m, theta_t, gap_space, gap_time })
}

/// `𝔡({K, L})`: diameter of the union of the two cells.
pub fn pair_gap(mesh: &PrimalMesh, k: usize, l: usize) -> f64 {
    let pts: Vec<_> = mesh.cell(k).vertices.iter().chain(mesh.cell(l).vertices.iter()).map(|&v| mesh.vertices()[v]).collect();
    diameter(&pts)
}
