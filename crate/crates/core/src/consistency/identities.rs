//! Single-level identity suite: geometry, dual measures, flux telescoping and
//! the summation-by-parts routes.

use crate::error::{FvError, Result};
use crate::exec::pairwise_sum;
use crate::fields::interpolate_test;
use crate::geometry::{Direction, DualMeshMAC, DualMeshRT, PrimalMesh};
use crate::operators::{conservation_defect, flux_staggered};

use super::study::{level_fields, setup_level};
use super::{compute_x1, compute_x2, jump_sums, StudyConfig, Unknowns, X2_ROUTE_TOL};

/// Relative tolerance of the measure partitions and flux telescoping.
pub const PARTITION_TOL: f64 = 1e-12;

/// One passed check with a short quantitative note.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub invariant: &'static str,
    pub detail: String,
}

fn fail(invariant: &'static str, entity: String, detail: String) -> FvError {
    FvError::Identity { invariant, entity, detail }
}

fn partition(invariant: &'static str, total: f64, omega: f64) -> Result<IdentityCheck> {
    let rel = (total - omega).abs() / omega;
    if !(rel <= PARTITION_TOL) {
        return Err(fail(invariant, "mesh".into(), format!("sum = {total}, |Omega| = {omega}")));
    }
    Ok(IdentityCheck { invariant, detail: format!("relative defect {rel:e}") })
}

/// Geometric identities, plus the RT and MAC dual partitions when the mesh
/// admits those duals.
pub fn check_mesh(mesh: &PrimalMesh) -> Result<Vec<IdentityCheck>> {
    mesh.check_identities()?;
    let closure = (0..mesh.n_cells())
        .map(|p| {
            let (s, scale) = mesh.closure_defect(p);
            s / scale
        })
        .fold(0.0, f64::max);
    let mut out = vec![IdentityCheck {
        invariant: "geometry",
        detail: format!("{} cells, {} faces, worst relative closure {closure:e}", mesh.n_cells(), mesh.n_faces()),
    }];
    if mesh.dim() != 2 {
        return Ok(out);
    }
    let omega = mesh.domain_measure();
    if let Ok(rt) = DualMeshRT::build(mesh) {
        for (p, cell) in mesh.cells().iter().enumerate() {
            let sum: f64 = cell.faces.iter().map(|_| rt.half_measure(p)).sum();
            if sum != cell.measure {
                return Err(fail("RT half duals", format!("cell {p}"), format!("sum {sum} vs |P| = {}", cell.measure)));
            }
        }
        let duals: Vec<f64> = (0..mesh.n_faces()).map(|f| rt.dual_measure(f)).collect();
        out.push(partition("RT dual partition", pairwise_sum(&duals), omega)?);
    }
    if mesh.is_rectangular().is_ok() {
        let mac = DualMeshMAC::build(mesh)?;
        for d in [Direction::X, Direction::Y] {
            let duals: Vec<f64> = mac.family(d).map(|f| mac.dual_measure(f)).collect();
            let name = if d == Direction::X { "MAC dual partition (x)" } else { "MAC dual partition (y)" };
            out.push(partition(name, pairwise_sum(&duals), omega)?);
        }
    }
    Ok(out)
}

/// Runs [`check_mesh`] on the configured level, then flux telescoping, the
/// `X1`/`X2` route agreement and the two `R1` summation orders on its fields.
pub fn check_level(cfg: &StudyConfig, level: usize) -> Result<Vec<IdentityCheck>> {
    cfg.validate()?;
    let s = setup_level(cfg, level)?;
    let (mesh, grid, layout) = (&s.mesh, &s.grid, &s.layout);
    let mut out = check_mesh(mesh)?;

    let fields = level_fields(cfg, &s)?;
    let pair = cfg.pair();
    let flux = flux_staggered(&fields.q, &fields.v, layout, mesh, &pair, cfg.face_scheme, cfg.boundary)?;
    let mut worst: f64 = 0.0;
    for n in 0..grid.n_steps() {
        let (d, scale) = conservation_defect(&flux, mesh, n)?;
        let rel = if scale > 0.0 { d / scale } else { d };
        if !(rel <= PARTITION_TOL) {
            return Err(fail("flux telescoping", format!("step {n}"), format!("relative defect {rel:e}")));
        }
        worst = worst.max(rel);
    }
    out.push(IdentityCheck { invariant: "flux telescoping", detail: format!("worst relative defect {worst:e}") });

    let phi = cfg.test_function.build(mesh, cfg.final_time)?;
    let interp = interpolate_test(phi.as_ref(), mesh, grid, cfg.interpolation, cfg.numerics.quadrature_order)?;
    let betas = fields.q.map(|x| pair.beta.eval(x));
    let x1 = compute_x1(&betas, &interp, mesh, grid)?;
    out.push(IdentityCheck {
        invariant: "X1 summation by parts",
        detail: format!("|direct - by parts| = {:e}", (x1.direct - x1.by_parts).abs()),
    });
    let u = Unknowns { q: &fields.q, v: &fields.v, layout, pair: &pair };
    let x2 = compute_x2(&flux, u, &interp, mesh, grid)?;
    let gap = x2.route_gap();
    if !(gap <= X2_ROUTE_TOL) {
        return Err(fail("X2 gradient route", format!("level {level}"), format!("relative gap {gap:e}")));
    }
    out.push(IdentityCheck { invariant: "X2 gradient route", detail: format!("relative gap {gap:e}") });
    let j = jump_sums(u, mesh, grid)?;
    out.push(IdentityCheck {
        invariant: "R1 face reordering",
        detail: format!("|cell form - face form| = {:e}", (j.r1 - j.r1_faces).abs()),
    });
    Ok(out)
}
