//! Cell/face means, test-function interpolates and L¹/L∞ distances.

use crate::error::Result;
use crate::exec::{map_range, pairwise_sum};
use crate::fields::discrete::{CellScalarField, FaceScalarField};
use crate::fields::test_fn::{check_support, TestFunction};
use crate::geometry::{Direction, DualMeshMAC, Point, PrimalMesh, TimeGrid};
use crate::quadrature::{quad_points, AdaptiveMean, GaussLegendre, MeshQuadrature};

/// Quadrature mean written as `f₀ + Σ w (f - f₀) / Σ w`, which returns
/// constants exactly.
pub fn weighted_mean<F: Fn(Point) -> f64>(points: &[(Point, f64)], f: F) -> f64 {
    let Some(((x0, _), _)) = points.split_first() else { return 0.0 };
    let f0 = f(*x0);
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, w) in points {
        num += w * (f(*x) - f0);
        den += w;
    }
    f0 + num / den
}

/// Cell means together with the largest estimated quadrature error
/// (orders `p` against `p + 2`, see [`AdaptiveMean`]).
#[derive(Debug, Clone)]
pub struct Sampled {
    pub field: CellScalarField,
    pub discrepancy: f64,
}

/// `q_P^n = (1/|P|) ∫_P f(x, t_n) dx` for `n ∈ 0..=N`.
pub fn sample_cell_means<F>(f: F, mesh: &PrimalMesh, grid: &TimeGrid, order: usize) -> Result<Sampled>
where
    F: Fn(Point, f64) -> f64 + Sync,
{
    let quad = AdaptiveMean::new(order);
    let levels = grid.n_steps() + 1;
    let per_cell: Vec<Result<(Vec<f64>, f64)>> = map_range(mesh.n_cells(), |p| {
        let mut vals = Vec::with_capacity(levels);
        let mut gap: f64 = 0.0;
        for n in 0..levels {
            let t = grid.t(n);
            let m = quad.cell_mean(mesh, p, |x| f(x, t))?;
            gap = gap.max(m.error);
            vals.push(m.mean);
        }
        Ok((vals, gap))
    });
    let per_cell = per_cell.into_iter().collect::<Result<Vec<_>>>()?;
    let discrepancy = per_cell.iter().fold(0.0f64, |m, c| m.max(c.1));
    let field = CellScalarField::from_fn(mesh.n_cells(), levels, |p, n| per_cell[p].0[n])?;
    Ok(Sampled { field, discrepancy })
}

/// Which time level the interpolate of level `n` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpVariant {
    #[default]
    AtTn,
    /// `t_{n+1}` (clamped to `t_N`).
    #[serde(rename = "at-tn-plus-1")]
    AtTnPlus1,
}

/// Discrete interpolate of a test function: cell means `φ_P^n`, face means
/// `φ_ζ^n`, the discrete gradient `(∇φ)_P^n` and time difference quotients.
#[derive(Debug, Clone)]
pub struct InterpolatedTest {
    variant: InterpVariant,
    n_cells: usize,
    n_faces: usize,
    n_levels: usize,
    cell: Vec<f64>,
    face: Vec<f64>,
    grad: Vec<Point>,
    dt: Vec<f64>,
}

impl InterpolatedTest {
    pub fn variant(&self) -> InterpVariant {
        self.variant
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn cell(&self, p: usize, n: usize) -> f64 {
        self.cell[n * self.n_cells + p]
    }

    pub fn cell_level(&self, n: usize) -> &[f64] {
        &self.cell[n * self.n_cells..(n + 1) * self.n_cells]
    }

    pub fn face(&self, z: usize, n: usize) -> f64 {
        self.face[n * self.n_faces + z]
    }

    pub fn grad(&self, p: usize, n: usize) -> Point {
        self.grad[n * self.n_cells + p]
    }

    /// `ð_t φ` on `P × (t_n, t_{n+1})`, `n < N`.
    pub fn dt(&self, p: usize, n: usize) -> f64 {
        self.dt[n * self.n_cells + p]
    }

    /// True when `φ_P^n = 0` on every cell with a boundary face.
    pub fn vanishes_on_boundary_cells(&self, mesh: &PrimalMesh) -> bool {
        (0..mesh.n_cells())
            .filter(|&p| !mesh.is_interior_cell(p))
            .all(|p| (0..self.n_levels).all(|n| self.cell(p, n) == 0.0))
    }

    /// True when `φ` vanishes on the closure of every boundary cell (cell and
    /// face means), which the gradient route of `X2` needs.
    pub fn clear_of_boundary(&self, mesh: &PrimalMesh) -> bool {
        self.vanishes_on_boundary_cells(mesh)
            && (0..mesh.n_cells()).filter(|&p| !mesh.is_interior_cell(p)).all(|p| {
                mesh.cell(p).faces.iter().all(|&z| (0..self.n_levels).all(|n| self.face(z, n) == 0.0))
            })
    }
}

fn sample_time(grid: &TimeGrid, variant: InterpVariant, n: usize) -> f64 {
    match variant {
        InterpVariant::AtTn => grid.t(n),
        InterpVariant::AtTnPlus1 => grid.t((n + 1).min(grid.n_steps())),
    }
}

/// Builds `φ_P^n`, `φ_ζ^n`, `(∇φ)_P^n = (1/|P|) Σ |ζ| φ_ζ^n n_{P,ζ}` and `ð_t φ`.
pub fn interpolate_test(
    phi: &dyn TestFunction,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
    variant: InterpVariant,
    order: usize,
) -> Result<InterpolatedTest> {
    check_support(phi, mesh, grid)?;
    let quad = AdaptiveMean::new(order);
    let n_levels = grid.n_steps() + 1;
    let (nc, nf) = (mesh.n_cells(), mesh.n_faces());
    let support = phi.support();
    let times: Vec<f64> = (0..n_levels).map(|n| sample_time(grid, variant, n)).collect();
    let active_time = |t: f64| support.is_some_and(|s| s.contains_time(t));
    let face_box = |z: usize| {
        let (a, b) = mesh.face_points(z);
        ([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])])
    };

    let face_vals: Vec<Vec<f64>> = map_range(nf, |z| {
        let (lo, hi) = face_box(z);
        let touches = support.is_some_and(|s| s.meets_box(mesh.dim(), lo, hi));
        times
            .iter()
            .map(|&t| if touches && active_time(t) { quad.face_mean(mesh, z, |x| phi.value(x, t)).mean } else { 0.0 })
            .collect()
    });
    let cell_vals: Vec<Result<Vec<f64>>> = map_range(nc, |p| {
        let (lo, hi) = mesh.cell_bbox(p);
        let touches = support.is_some_and(|s| s.meets_box(mesh.dim(), lo, hi));
        times
            .iter()
            .map(|&t| {
                if touches && active_time(t) {
                    Ok(quad.cell_mean(mesh, p, |x| phi.value(x, t))?.mean)
                } else {
                    Ok(0.0)
                }
            })
            .collect()
    });
    let cell_vals = cell_vals.into_iter().collect::<Result<Vec<_>>>()?;

    let mut cell = vec![0.0; n_levels * nc];
    let mut face = vec![0.0; n_levels * nf];
    let mut grad = vec![[0.0; 2]; n_levels * nc];
    let mut dt = vec![0.0; grid.n_steps() * nc];
    for (z, vals) in face_vals.iter().enumerate() {
        for (n, v) in vals.iter().enumerate() {
            face[n * nf + z] = *v;
        }
    }
    for (p, vals) in cell_vals.iter().enumerate() {
        let c = mesh.cell(p);
        for n in 0..n_levels {
            cell[n * nc + p] = vals[n];
            let mut g = [0.0; 2];
            for &z in &c.faces {
                let nz = mesh.normal(p, z);
                let w = mesh.face(z).measure * face[n * nf + z];
                g[0] += w * nz[0];
                g[1] += w * nz[1];
            }
            grad[n * nc + p] = [g[0] / c.measure, g[1] / c.measure];
        }
        for n in 0..grid.n_steps() {
            dt[n * nc + p] = (vals[n + 1] - vals[n]) / grid.step(n);
        }
    }
    Ok(InterpolatedTest { variant, n_cells: nc, n_faces: nf, n_levels, cell, face, grad, dt })
}

/// `‖a − b‖` in L¹ and L∞ over `Ω × (0, T)` plus `‖a‖_∞` over the levels in use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpDistance {
    pub l1: f64,
    pub linf: f64,
    pub sup_a: f64,
}

/// Distance between a piecewise-constant cell field (level `n` on
/// `[t_n, t_{n+1})`) and a continuous function, by tensor quadrature per
/// cell and step.
pub fn lp_distance<F>(a: &CellScalarField, b: F, mesh: &PrimalMesh, grid: &TimeGrid, order: usize) -> Result<LpDistance>
where
    F: Fn(Point, f64) -> f64 + Sync,
{
    let quad = MeshQuadrature::new(mesh, order)?;
    let rule = GaussLegendre::new(order);
    let per_cell: Vec<(f64, f64)> = map_range(mesh.n_cells(), |p| {
        let mut l1 = Vec::with_capacity(grid.n_steps());
        let mut linf: f64 = 0.0;
        for n in 0..grid.n_steps() {
            let an = a.get(p, n);
            let mut s = 0.0;
            for (t, wt) in rule.mapped(grid.t(n), grid.t(n + 1)) {
                for (x, w) in quad.cell(p) {
                    let d = (an - b(*x, t)).abs();
                    linf = linf.max(d);
                    s += wt * w * d;
                }
            }
            l1.push(s);
        }
        (pairwise_sum(&l1), linf)
    });
    let l1 = pairwise_sum(&per_cell.iter().map(|c| c.0).collect::<Vec<_>>());
    let linf = per_cell.iter().fold(0.0f64, |m, c| m.max(c.1));
    let sup_a = (0..grid.n_steps()).flat_map(|n| a.level(n).iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(LpDistance { l1, linf, sup_a })
}

/// Same for a MAC velocity: component `i` is piecewise constant on the two
/// half rectangles of each cell split across direction `i`. The L¹ distance
/// sums both components.
pub fn lp_distance_mac<F>(
    v: &FaceScalarField,
    vbar: F,
    mesh: &PrimalMesh,
    dual: &DualMeshMAC,
    grid: &TimeGrid,
    order: usize,
) -> Result<LpDistance>
where
    F: Fn(Point, f64) -> Point + Sync,
{
    let rule = GaussLegendre::new(order);
    let per_cell: Vec<(f64, f64)> = map_range(mesh.n_cells(), |p| {
        let (lo, hi) = mesh.cell_bbox(p);
        let mut parts = Vec::new();
        let mut linf: f64 = 0.0;
        for d in [Direction::X, Direction::Y] {
            let i = d.index();
            let mid = 0.5 * (lo[i] + hi[i]);
            let (f_lo, f_hi) = dual.pair(p, d);
            for (z, a, b) in [(f_lo, lo[i], mid), (f_hi, mid, hi[i])] {
                let (mut l, mut h) = (lo, hi);
                l[i] = a;
                h[i] = b;
                let pts = quad_points(&rule, &[l, [h[0], l[1]], h, [l[0], h[1]]]);
                for n in 0..grid.n_steps() {
                    let vz = v.get(z, n);
                    let mut s = 0.0;
                    for (t, wt) in rule.mapped(grid.t(n), grid.t(n + 1)) {
                        for (x, w) in &pts {
                            let dd = (vz - vbar(*x, t)[i]).abs();
                            linf = linf.max(dd);
                            s += wt * w * dd;
                        }
                    }
                    parts.push(s);
                }
            }
        }
        (pairwise_sum(&parts), linf)
    });
    let l1 = pairwise_sum(&per_cell.iter().map(|c| c.0).collect::<Vec<_>>());
    let linf = per_cell.iter().fold(0.0f64, |m, c| m.max(c.1));
    let mut sup_a: f64 = 0.0;
    for n in 0..grid.n_steps() {
        for z in 0..v.n_faces() {
            sup_a = sup_a.max(v.get(z, n).abs());
        }
    }
    Ok(LpDistance { l1, linf, sup_a })
}
