//! Discrete time derivative and assembly of `C(U)_P^n`.

use crate::error::{FvError, Result};
use crate::exec::{exact_sum, map_range, pairwise_sum};
use crate::fields::CellScalarField;
use crate::geometry::{PrimalMesh, TimeGrid};
use crate::operators::FluxFamily;

/// `(ð_t β)_P^n = (β_P^{n+1} − β_P^n) / (t_{n+1} − t_n)`, `n < N`.
pub fn dt_beta(betas: &CellScalarField, grid: &TimeGrid) -> Result<CellScalarField> {
    let steps = grid.n_steps();
    if betas.n_levels() != steps + 1 {
        return Err(FvError::Mismatch(format!("{} levels for {steps} time steps", betas.n_levels())));
    }
    CellScalarField::from_fn(betas.n_cells(), steps, |p, n| (betas.get(p, n + 1) - betas.get(p, n)) / grid.step(n))
}

/// `Σ_{ζ∈F(P)} |ζ| F_ζ^n·n_{P,ζ}`. In 2D `|ζ| n_{P,ζ}` is the rotated edge
/// vector and every product is split exactly, so fluxes cancelling in real
/// arithmetic cancel in floating point too.
pub fn cell_flux_sum(flux: &FluxFamily, mesh: &PrimalMesh, p: usize, n: usize) -> Result<f64> {
    let faces = &mesh.cell(p).faces;
    if mesh.dim() == 1 {
        let mut terms = [0.0; 2];
        for (k, &z) in faces.iter().enumerate() {
            terms[k] = flux.get(z, n)?[0] * mesh.normal(p, z)[0];
        }
        return Ok(exact_sum(terms[..faces.len()].iter().copied()));
    }
    let mut terms = Vec::with_capacity(8 * faces.len());
    for &z in faces {
        let f = flux.get(z, n)?;
        let (a, b) = mesh.face_points(z);
        let (dx, dy) = (two_diff(b[0], a[0]), two_diff(b[1], a[1]));
        let stored = mesh.normal(p, z);
        let sign = if dy.0 * stored[0] - dx.0 * stored[1] >= 0.0 { 1.0 } else { -1.0 };
        for (c, d) in [(f[0], dy.0), (f[0], dy.1), (-f[1], dx.0), (-f[1], dx.1)] {
            let (hi, lo) = two_prod(sign * c, d);
            terms.push(hi);
            terms.push(lo);
        }
    }
    Ok(exact_sum(terms))
}

/// `a − b` as an unevaluated sum `hi + lo`.
fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let hi = a - b;
    let bb = hi - a;
    (hi, (a - (hi - bb)) - (b + bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `C(U)_P^n` split in its two parts.
#[derive(Debug, Clone)]
pub struct Convection {
    pub dt_beta: CellScalarField,
    /// `(1/|P|) Σ |ζ| F_ζ^n·n_{P,ζ}`.
    pub flux_div: CellScalarField,
    pub values: CellScalarField,
}

/// `C(U)_P^n = (ð_t β)_P^n + (1/|P|) Σ_{ζ∈F(P)} |ζ| F_ζ^n·n_{P,ζ}`, `n < N`.
pub fn assemble_convection(
    betas: &CellScalarField,
    flux: &FluxFamily,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
) -> Result<Convection> {
    let dtb = dt_beta(betas, grid)?;
    if flux.n_faces() != mesh.n_faces() || flux.n_steps() < grid.n_steps() {
        return Err(FvError::Mismatch("flux family does not match the discretisation".into()));
    }
    let steps = grid.n_steps();
    let per_cell: Vec<Result<Vec<f64>>> = map_range(mesh.n_cells(), |p| {
        (0..steps).map(|n| Ok(cell_flux_sum(flux, mesh, p, n)? / mesh.cell(p).measure)).collect()
    });
    let per_cell = per_cell.into_iter().collect::<Result<Vec<_>>>()?;
    let flux_div = CellScalarField::from_fn(mesh.n_cells(), steps, |p, n| per_cell[p][n])?;
    let values = CellScalarField::from_fn(mesh.n_cells(), steps, |p, n| dtb.get(p, n) + flux_div.get(p, n))?;
    Ok(Convection { dt_beta: dtb, flux_div, values })
}

/// Interior-flux telescoping at level `n`: returns
/// `|Σ_P Σ_ζ |ζ| F·n_{P,ζ} − Σ_{ζ⊂∂Ω} |ζ| F·n_out|` and the scale
/// `Σ_ζ |ζ| ‖F_ζ‖`.
pub fn conservation_defect(flux: &FluxFamily, mesh: &PrimalMesh, n: usize) -> Result<(f64, f64)> {
    let cells = (0..mesh.n_cells()).map(|p| cell_flux_sum(flux, mesh, p, n)).collect::<Result<Vec<_>>>()?;
    let mut boundary = Vec::new();
    let mut scale = Vec::new();
    for (z, f) in mesh.faces().iter().enumerate() {
        let fz = flux.get(z, n)?;
        scale.push(f.measure * (fz[0] * fz[0] + fz[1] * fz[1]).sqrt());
        if f.is_boundary() {
            boundary.push(f.measure * (fz[0] * f.normal[0] + fz[1] * f.normal[1]));
        }
    }
    Ok(((pairwise_sum(&cells) - pairwise_sum(&boundary)).abs(), pairwise_sum(&scale)))
}
