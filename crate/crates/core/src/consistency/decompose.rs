//! `∫∫ C(U) I(φ) = X1 + X2` and the alternative routes used in the limit argument.

use crate::error::{FvError, Result};
use crate::fields::{CellScalarField, InterpolatedTest};
use crate::geometry::{PrimalMesh, TimeGrid};
use crate::operators::{cell_flux_sum, mean_flux, FluxFamily};

use super::{level_sum, Unknowns};

/// Relative agreement required between the direct and summation-by-parts forms of `X1`.
pub const X1_ROUTE_TOL: f64 = 1e-12;
/// Relative agreement required between the direct and gradient routes of `X2`.
pub const X2_ROUTE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct X1Value {
    /// `Σ_n δt_n Σ_P |P| (ð_t β)_P^n φ_P^n`.
    pub direct: f64,
    /// `−Σ_P |P| β_P^0 φ_P^0 − Σ_{n≥1} Σ_P |P| β_P^n (φ_P^n − φ_P^{n−1}) + Σ_P |P| β_P^N φ_P^N`.
    pub by_parts: f64,
    /// Sum of the absolute values of the terms of both forms.
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct X2Value {
    /// `Σ_n δt_n Σ_{P∈P_int} Σ_ζ |ζ| F_ζ^n·n_{P,ζ} φ_P^n`.
    pub direct: f64,
    /// `−Σ_n δt_n Σ_{P∈P_int} |P| f̄_P^n·(∇φ)_P^n`, `f̄_P^n` the mean of `f(U)` over `P`.
    pub gradient: f64,
    /// `Σ_n δt_n Σ_{P∈P_int} Σ_ζ |ζ| (F_ζ^n − f̄_P^n)·n_{P,ζ} (φ_P^n − φ_ζ^n)`.
    pub remainder: f64,
    /// Magnitude of the terms involved in both routes.
    pub scale: f64,
}

impl X2Value {
    /// `|direct − (gradient + remainder)| / scale`.
    pub fn route_gap(&self) -> f64 {
        if self.scale > 0.0 {
            (self.direct - (self.gradient + self.remainder)).abs() / self.scale
        } else {
            0.0
        }
    }
}

fn check_levels(n_levels: usize, grid: &TimeGrid, what: &str) -> Result<()> {
    if n_levels != grid.n_steps() + 1 {
        return Err(FvError::Mismatch(format!("{what} has {n_levels} levels for {} steps", grid.n_steps())));
    }
    Ok(())
}

pub fn compute_x1(betas: &CellScalarField, phi: &InterpolatedTest, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<X1Value> {
    check_levels(betas.n_levels(), grid, "beta family")?;
    check_levels(phi.n_levels(), grid, "test interpolate")?;
    let big_n = grid.n_steps();
    let all: Vec<usize> = (0..mesh.n_cells()).collect();
    let m = |p: usize| mesh.cell(p).measure;
    let dtb = |p: usize, n: usize| (betas.get(p, n + 1) - betas.get(p, n)) / grid.step(n);
    let direct = level_sum(big_n, |n| grid.step(n), &all, |p, n| m(p) * dtb(p, n) * phi.cell(p, n));
    let direct_abs = level_sum(big_n, |n| grid.step(n), &all, |p, n| (m(p) * dtb(p, n) * phi.cell(p, n)).abs());

    let bp_term = |p: usize, n: usize| match n {
        0 => -m(p) * betas.get(p, 0) * phi.cell(p, 0),
        _ => -m(p) * betas.get(p, n) * (phi.cell(p, n) - phi.cell(p, n - 1)),
    };
    let end = |p: usize, _n: usize| m(p) * betas.get(p, big_n) * phi.cell(p, big_n);
    let by_parts = level_sum(big_n + 1, |_| 1.0, &all, bp_term) + level_sum(1, |_| 1.0, &all, end);
    let bp_abs = level_sum(big_n + 1, |_| 1.0, &all, |p, n| bp_term(p, n).abs())
        + level_sum(1, |_| 1.0, &all, |p, n| end(p, n).abs());

    let scale = direct_abs + bp_abs;
    if (direct - by_parts).abs() > X1_ROUTE_TOL * scale {
        return Err(FvError::Identity {
            invariant: "X1 summation by parts",
            entity: "study level".into(),
            detail: format!("direct {direct:e} vs by parts {by_parts:e} (scale {scale:e})"),
        });
    }
    Ok(X1Value { direct, by_parts, scale })
}

pub fn compute_x2(
    flux: &FluxFamily,
    u: Unknowns<'_>,
    phi: &InterpolatedTest,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
) -> Result<X2Value> {
    check_levels(phi.n_levels(), grid, "test interpolate")?;
    if !phi.clear_of_boundary(mesh) {
        return Err(FvError::Support("the test interpolate does not vanish on the boundary cells at this resolution".into()));
    }
    let steps = grid.n_steps();
    let int = mesh.interior_cells();
    let dt = |n: usize| grid.step(n);
    let fbar = |p: usize, n: usize| mean_flux(u.q, u.v, u.layout, mesh, u.pair, p, n);

    let direct_term = |p: usize, n: usize| cell_flux_sum(flux, mesh, p, n).map(|s| s * phi.cell(p, n));
    // Missing fluxes surface here before the sums below unwrap.
    for n in 0..steps {
        for &p in int {
            direct_term(p, n)?;
        }
    }
    let direct = level_sum(steps, dt, int, |p, n| direct_term(p, n).unwrap());
    let gradient = -level_sum(steps, dt, int, |p, n| {
        let f = fbar(p, n);
        let g = phi.grad(p, n);
        mesh.cell(p).measure * (f[0] * g[0] + f[1] * g[1])
    });
    let remainder = level_sum(steps, dt, int, |p, n| {
        let f = fbar(p, n);
        let mut s = 0.0;
        for &z in &mesh.cell(p).faces {
            let fz = flux.get(z, n).unwrap();
            let nz = mesh.normal(p, z);
            let d = (fz[0] - f[0]) * nz[0] + (fz[1] - f[1]) * nz[1];
            s += mesh.face(z).measure * d * (phi.cell(p, n) - phi.face(z, n));
        }
        s
    });
    let scale = level_sum(steps, dt, int, |p, n| {
        let f = fbar(p, n);
        let fnorm = (f[0] * f[0] + f[1] * f[1]).sqrt();
        let mut s = 0.0;
        for &z in &mesh.cell(p).faces {
            let fz = flux.get(z, n).unwrap();
            let nz = mesh.normal(p, z);
            let fzn = (fz[0] * nz[0] + fz[1] * nz[1]).abs();
            s += mesh.face(z).measure * (fzn + fnorm) * (phi.cell(p, n).abs() + phi.face(z, n).abs());
        }
        s
    });
    let value = X2Value { direct, gradient, remainder, scale };
    if value.route_gap() > X2_ROUTE_TOL {
        return Err(FvError::Identity {
            invariant: "X2 gradient route",
            entity: "study level".into(),
            detail: format!("direct {direct:e} vs {:e} (scale {scale:e})", gradient + remainder),
        });
    }
    Ok(value)
}
