//! Hypothesis residuals (initialization, time, flux) and the staggered jump sums.

use crate::error::{FvError, Result};
use crate::exec::{map_range, pairwise_sum};
use crate::fields::{CellScalarField, TestFunction};
use crate::geometry::{Direction, Point, PrimalMesh, TimeGrid};
use crate::operators::{local_flux_pieces, FluxFamily, Layout, NonlinearityPair, Velocity};
use crate::quadrature::{AdaptiveMean, GaussLegendre, MeshQuadrature};

use super::{level_sum, Unknowns};

/// Quadrature order of the L¹ majorants, whose integrands have kinks.
const MAJORANT_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitResidual {
    /// `Σ_{P∈P_int} ∫_P (β(q_P^0) − β(q0(x))) φ(x, 0) dx`.
    pub signed: f64,
    /// `C_β Σ_P ∫_P |q0 − q_P^0|`.
    pub majorant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeResidual {
    /// `Σ_{n=1}^N Σ_{P∈P_int} (β(q_P^n) − β(q_P^{n−1})) ∫_{t_{n−1}}^{t_n} ∫_P φ`.
    pub signed: f64,
    /// `C_β ‖φ‖_∞ Σ_{n=1}^N δt_{n−1} Σ_{P∈P_int} |P| |q_P^n − q_P^{n−1}|`.
    pub majorant: f64,
}

fn cell_meets(phi: &dyn TestFunction, mesh: &PrimalMesh, p: usize) -> bool {
    phi.support().is_some_and(|s| {
        let (lo, hi) = mesh.cell_bbox(p);
        s.meets_box(mesh.dim(), lo, hi)
    })
}

pub fn residual_init(
    q: &CellScalarField,
    q0: &(dyn Fn(Point) -> f64 + Sync),
    phi: &dyn TestFunction,
    mesh: &PrimalMesh,
    pair: &NonlinearityPair,
    order: usize,
) -> Result<InitResidual> {
    if q.n_cells() != mesh.n_cells() || q.n_levels() == 0 {
        return Err(FvError::Mismatch("initial level missing or sized for another mesh".into()));
    }
    let quad = AdaptiveMean::new(order);
    let int = mesh.interior_cells();
    let at_zero = phi.support().is_some_and(|s| s.contains_time(0.0));
    let signed_terms = map_range(int.len(), |i| {
        let p = int[i];
        if !at_zero || !cell_meets(phi, mesh, p) {
            return Ok(0.0);
        }
        let bp = pair.beta.eval(q.get(p, 0));
        let m = quad.cell_mean(mesh, p, |x| (bp - pair.beta.eval(q0(x))) * phi.value(x, 0.0))?;
        Ok(mesh.cell(p).measure * m.mean)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let fixed = MeshQuadrature::new(mesh, MAJORANT_ORDER)?;
    // The Lipschitz constant is taken over the discrete values and the
    // sampled values of q0.
    let per_cell = map_range(mesh.n_cells(), |p| {
        let qp = q.get(p, 0);
        let (mut lo, mut hi, mut s) = (qp, qp, 0.0);
        for &(x, w) in fixed.cell(p) {
            let v = q0(x);
            lo = lo.min(v);
            hi = hi.max(v);
            s += w * (v - qp).abs();
        }
        (s, lo, hi)
    });
    let l1 = pairwise_sum(&per_cell.iter().map(|c| c.0).collect::<Vec<_>>());
    let majorant = if l1 == 0.0 {
        0.0
    } else {
        let (qlo, qhi) = q.range();
        let lo = per_cell.iter().fold(qlo, |m, c| m.min(c.1));
        let hi = per_cell.iter().fold(qhi, |m, c| m.max(c.2));
        pair.beta.lipschitz(lo, hi) * l1
    };
    Ok(InitResidual { signed: pairwise_sum(&signed_terms), majorant })
}

pub fn residual_time(
    q: &CellScalarField,
    phi: &dyn TestFunction,
    pair: &NonlinearityPair,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
    order: usize,
) -> Result<TimeResidual> {
    let steps = grid.n_steps();
    if q.n_levels() != steps + 1 || q.n_cells() != mesh.n_cells() {
        return Err(FvError::Mismatch(format!("{} levels for {steps} steps", q.n_levels())));
    }
    let int = mesh.interior_cells();
    let quad = MeshQuadrature::new(mesh, order)?;
    let rule = GaussLegendre::new(order);
    let support = phi.support();
    // Index `k` stands for the interval (t_k, t_{k+1}) and the jump q^{k+1} − q^k.
    let signed = level_sum(steps, |_| 1.0, int, |p, k| {
        let db = pair.beta.eval(q.get(p, k + 1)) - pair.beta.eval(q.get(p, k));
        let Some(s) = support else { return 0.0 };
        if db == 0.0 || grid.t(k + 1) <= s.t_lo || grid.t(k) >= s.t_hi || !cell_meets(phi, mesh, p) {
            return 0.0;
        }
        let mut acc = 0.0;
        for (t, wt) in rule.mapped(grid.t(k), grid.t(k + 1)) {
            acc += wt * quad.integrate_cell(p, |x| phi.value(x, t));
        }
        db * acc
    });
    let jumps = level_sum(steps, |k| grid.step(k), int, |p, k| {
        mesh.cell(p).measure * (q.get(p, k + 1) - q.get(p, k)).abs()
    });
    let majorant = if jumps == 0.0 {
        0.0
    } else {
        let (lo, hi) = q.range();
        pair.beta.lipschitz(lo, hi) * phi.sup_norm() * jumps
    };
    Ok(TimeResidual { signed, majorant })
}

fn check_unknowns(u: &Unknowns<'_>, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<()> {
    if u.q.n_cells() != mesh.n_cells() || u.q.n_levels() < grid.n_steps() {
        return Err(FvError::Mismatch("cell field does not match the discretisation".into()));
    }
    u.v.check(u.layout, mesh, grid.n_steps())
}

/// `R = Σ_n δt_n Σ_{P∈P_int} (diam(P)/|P|) Σ_{ζ∈F(P)} |ζ| Σ_k |D_k| |F_ζ^n·n_{P,ζ} − f_k|`
/// over the pieces `D_k` of [`local_flux_pieces`].
///
/// Summation order: faces of `P` and pieces in storage order, accumulated
/// left to right; the per-cell values pairwise over `P_int` per level; the
/// `δt_n`-weighted level sums pairwise over `n`.
pub fn residual_flux(flux: &FluxFamily, u: Unknowns<'_>, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<f64> {
    check_unknowns(&u, mesh, grid)?;
    let steps = grid.n_steps();
    if flux.n_faces() != mesh.n_faces() || flux.n_steps() < steps {
        return Err(FvError::Mismatch("flux family does not match the discretisation".into()));
    }
    let int = mesh.interior_cells();
    for n in 0..steps {
        for &p in int {
            for &z in &mesh.cell(p).faces {
                flux.get(z, n)?;
            }
        }
    }
    Ok(level_sum(steps, |n| grid.step(n), int, |p, n| {
        let cell = mesh.cell(p);
        let mut s = 0.0;
        for &z in &cell.faces {
            let f = flux.get(z, n).unwrap();
            let nz = mesh.normal(p, z);
            let fz = f[0] * nz[0] + f[1] * nz[1];
            let (pieces, count) = local_flux_pieces(u.q, u.v, u.layout, mesh, u.pair, p, z, n);
            let mut inner = 0.0;
            for &(m, val) in &pieces[..count] {
                inner += m * (fz - val).abs();
            }
            s += mesh.face(z).measure * inner;
        }
        cell.diameter / cell.measure * s
    }))
}

/// `C = max(C_g ‖v‖_∞, ‖g(q)‖_∞)` over the levels `n < N`, the constant of
/// `R ≤ C (R1 + R2)`.
pub fn flux_constant(u: Unknowns<'_>, grid: &TimeGrid) -> f64 {
    let levels = grid.n_steps().min(u.q.n_levels());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut g_sup: f64 = 0.0;
    for n in 0..levels {
        for &s in u.q.level(n) {
            lo = lo.min(s);
            hi = hi.max(s);
            g_sup = g_sup.max(u.pair.g.eval(s).abs());
        }
    }
    if levels == 0 {
        return 0.0;
    }
    (u.pair.g.lipschitz(lo, hi) * u.v.sup_norm()).max(g_sup)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSums {
    /// `Σ_n δt_n Σ_P diam(P) Σ_{ζ=P|Q} |ζ| |q_P^n − q_Q^n|`.
    pub r1: f64,
    /// The same, face by face with `ω_ζ = (diam(P) + diam(Q)) |ζ|`.
    pub r1_faces: f64,
    /// Dual-edge form: RT `Σ_n δt_n Σ_P 3 diam(P)² Σ_{η∈F*(P)} |v_ζ − v_ζ′|`,
    /// MAC `Σ_i Σ_n δt_n Σ_P diam(P) (|ζ| + |ζ′|) |v_ζ − v_ζ′|` over `F^(i)(P) = {ζ, ζ′}`.
    pub r2: f64,
    /// `Σ_n δt_n Σ_P diam(P) Σ_{{ζ,ζ′}⊂F(P)} (|ζ| + |ζ′|) |v_ζ − v_ζ′|` over unordered
    /// pairs of faces carrying the same kind of unknown.
    pub r2_direct: f64,
    /// MAC only: the two directional parts of `r2`.
    pub r2_by_direction: Option<[f64; 2]>,
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Relative agreement required between the cell and face forms of `R1`.
const R1_FORM_TOL: f64 = 1e-12;

pub fn jump_sums(u: Unknowns<'_>, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<JumpSums> {
    check_unknowns(&u, mesh, grid)?;
    let steps = grid.n_steps();
    let dt = |n: usize| grid.step(n);
    let all: Vec<usize> = (0..mesh.n_cells()).collect();
    let q = u.q;

    let r1 = level_sum(steps, dt, &all, |p, n| {
        let cell = mesh.cell(p);
        let mut s = 0.0;
        for &z in &cell.faces {
            if let Some(o) = mesh.neighbour(p, z) {
                s += mesh.face(z).measure * (q.get(p, n) - q.get(o, n)).abs();
            }
        }
        cell.diameter * s
    });
    let interior_faces: Vec<usize> = (0..mesh.n_faces()).filter(|&z| !mesh.face(z).is_boundary()).collect();
    let r1_faces = level_sum(steps, dt, &interior_faces, |z, n| {
        let f = mesh.face(z);
        let r = f.right.unwrap();
        let w = (mesh.cell(f.left).diameter + mesh.cell(r).diameter) * f.measure;
        w * (q.get(f.left, n) - q.get(r, n)).abs()
    });
    if (r1 - r1_faces).abs() > R1_FORM_TOL * r1.max(r1_faces) {
        return Err(FvError::Identity {
            invariant: "R1 face reordering",
            entity: "jump sums".into(),
            detail: format!("cell form {r1:e} vs face form {r1_faces:e}"),
        });
    }

    let vec_at = |z: usize, n: usize| u.v.vector(u.layout, z, n);
    let (r2, r2_direct, r2_by_direction) = match (u.layout, u.v) {
        (Layout::Colocated1d, Velocity::Speed(_)) => (0.0, 0.0, None),
        (Layout::Rt(d), Velocity::Rt(_)) => {
            let r2 = level_sum(steps, dt, &all, |p, n| {
                let diam = mesh.cell(p).diameter;
                let mut s = 0.0;
                for &e in d.cell_edges(p) {
                    let (a, b) = d.edges()[e].faces;
                    s += dist(vec_at(a, n), vec_at(b, n));
                }
                3.0 * diam * diam * s
            });
            let direct = level_sum(steps, dt, &all, |p, n| {
                let f = &mesh.cell(p).faces;
                let mut s = 0.0;
                for i in 0..f.len() {
                    for j in i + 1..f.len() {
                        let w = mesh.face(f[i]).measure + mesh.face(f[j]).measure;
                        s += w * dist(vec_at(f[i], n), vec_at(f[j], n));
                    }
                }
                mesh.cell(p).diameter * s
            });
            (r2, direct, None)
        }
        (Layout::Mac(d), Velocity::Mac(v)) => {
            let part = |dir: Direction| {
                level_sum(steps, dt, &all, |p, n| {
                    let (a, b) = d.pair(p, dir);
                    let w = mesh.face(a).measure + mesh.face(b).measure;
                    mesh.cell(p).diameter * w * (v.get(a, n) - v.get(b, n)).abs()
                })
            };
            let parts = [part(Direction::X), part(Direction::Y)];
            (parts[0] + parts[1], parts[0] + parts[1], Some(parts))
        }
        _ => return Err(FvError::Mismatch("velocity does not match the layout".into())),
    };
    Ok(JumpSums { r1, r1_faces, r2, r2_direct, r2_by_direction })
}
