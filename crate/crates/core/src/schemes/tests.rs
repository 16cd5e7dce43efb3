use proptest::prelude::*;

use super::*;
use crate::fields::lp_distance;
use crate::geometry::{BoxDomain, PrimalMesh, TimeGrid};
use crate::operators::{BoundaryPolicy, Layout, LayoutKind, Velocity};

fn cfg(q0: ScalarProfile, velocity: [f64; 2], cfl: f64, final_time: f64) -> SchemeConfig {
    SchemeConfig {
        q0,
        velocity: VectorProfile::Constant { value: velocity },
        cfl,
        policy: BoundaryPolicy::default(),
        final_time,
    }
}

/// Initial data supported in the first of `k` cells of `[0, 1]`.
fn first_cell(k: usize) -> ScalarProfile {
    let h = 1.0 / k as f64;
    ScalarProfile::Bump { centre: [0.5 * h, 0.0], radius: 0.5 * h, height: 1.0, offset: 0.0 }
}

#[test]
fn upwind_keeps_constants_with_periodic_wrap() {
    let mesh = PrimalMesh::interval(16, 0.0, 1.0).unwrap();
    let mut c = cfg(ScalarProfile::Constant { value: 0.7 }, [1.0, 0.0], 0.8, 0.5);
    c.policy = BoundaryPolicy::Periodic;
    let grid = c.time_grid(&mesh, &Layout::Colocated1d).unwrap();
    let run = run_upwind_1d(&c, &mesh, &grid).unwrap();
    for n in 0..=grid.n_steps() {
        assert!(run.q.level(n).iter().all(|&v| v == 0.7));
    }
}

#[test]
fn cfl_one_shifts_exactly() {
    let k = 8;
    let mesh = PrimalMesh::interval(k, 0.0, 1.0).unwrap();
    let c = cfg(first_cell(k), [1.0, 0.0], 1.0, 0.5);
    let grid = c.time_grid(&mesh, &Layout::Colocated1d).unwrap();
    assert_eq!(grid.n_steps(), 4);
    let run = run_upwind_1d(&c, &mesh, &grid).unwrap();
    let q0 = run.q.level(0).to_vec();
    for n in 1..=4 {
        let qn = run.q.level(n);
        for p in 0..k {
            let expected = if p >= n { q0[p - n] } else { 0.0 };
            assert_eq!(qn[p], expected, "level {n} cell {p}");
        }
    }
}

#[test]
fn half_cfl_step_matches_stencil() {
    let k = 16;
    let h = 1.0 / k as f64;
    let mesh = PrimalMesh::interval(k, 0.0, 1.0).unwrap();
    let c = cfg(first_cell(k), [1.0, 0.0], 0.5, 0.5 * h);
    let grid = c.time_grid(&mesh, &Layout::Colocated1d).unwrap();
    assert_eq!(grid.n_steps(), 1);
    let run = run_upwind_1d(&c, &mesh, &grid).unwrap();
    let u0 = run.q.level(0);
    let u1 = run.q.level(1);
    for p in 0..k {
        let left = if p == 0 { 0.0 } else { u0[p - 1] };
        assert!((u1[p] - (u0[p] - 0.5 * (u0[p] - left))).abs() < 1e-15);
    }
    let m = u0[0];
    assert!((u1[0] - 0.5 * m).abs() < 1e-15 && (u1[1] - 0.5 * m).abs() < 1e-15);
    assert!(u1[2..].iter().all(|&v| v == 0.0));
}

#[test]
fn cfl_violation_is_rejected_before_stepping() {
    let mesh = PrimalMesh::interval(10, 0.0, 1.0).unwrap();
    let c = cfg(ScalarProfile::Constant { value: 1.0 }, [1.0, 0.0], 0.5, 1.0);
    let grid = TimeGrid::uniform(1.0, 10).unwrap();
    assert!(matches!(run_upwind_1d(&c, &mesh, &grid), Err(crate::error::FvError::Cfl { step: 0, .. })));
    let bad = cfg(ScalarProfile::Constant { value: 1.0 }, [1.0, 0.0], 1.5, 1.0);
    assert!(bad.validate().is_err());
    let backwards = cfg(ScalarProfile::Constant { value: 1.0 }, [-1.0, 0.0], 0.5, 1.0);
    assert!(run_upwind_1d(&backwards, &mesh, &grid).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn upwind_max_principle(
        centre in 0.2f64..0.8, radius in 0.05f64..0.2, height in -2.0f64..2.0, offset in -1.0f64..1.0,
        cfl in 0.1f64..=1.0, k in 8usize..40,
    ) {
        let mesh = PrimalMesh::interval(k, 0.0, 1.0).unwrap();
        let c = cfg(ScalarProfile::Bump { centre: [centre, 0.0], radius, height, offset }, [1.0, 0.0], cfl, 0.4);
        let grid = c.time_grid(&mesh, &Layout::Colocated1d).unwrap();
        let run = run_upwind_1d(&c, &mesh, &grid).unwrap();
        let (lo, hi) = run.log.initial_range;
        let (lo, hi) = (lo.min(0.0), hi.max(0.0));
        prop_assert!(run.log.range.0 >= lo - 1e-15 && run.log.range.1 <= hi + 1e-15);
        prop_assert!(run.log.max_defect() <= 1e-12);
        prop_assert!(run.log.max_cfl() <= cfl * (1.0 + 1e-12));
    }
}

fn rect(nx: usize, ny: usize) -> PrimalMesh {
    PrimalMesh::build_cartesian(nx, ny, BoxDomain::unit_square(), None).unwrap()
}

#[test]
fn mac_resting_fluid_keeps_data() {
    let mesh = rect(6, 6);
    let c = cfg(ScalarProfile::SinSinCos { amplitude: 1.0, offset: 2.0 }, [0.0, 0.0], 0.5, 0.3);
    let layout = Layout::build(LayoutKind::Mac, &mesh).unwrap();
    let grid = c.time_grid(&mesh, &layout).unwrap();
    let run = run_mass_mac(&c, &mesh, &grid).unwrap();
    for n in 1..=grid.n_steps() {
        assert_eq!(run.q.level(n), run.q.level(0));
    }
}

#[test]
fn mac_constant_state_survives_inside() {
    let mesh = rect(8, 8);
    let c = cfg(ScalarProfile::Constant { value: 1.3 }, [0.6, -0.4], 0.9, 0.02);
    let layout = Layout::build(LayoutKind::Mac, &mesh).unwrap();
    let grid = c.time_grid(&mesh, &layout).unwrap();
    assert_eq!(grid.n_steps(), 1);
    let run = run_mass_mac(&c, &mesh, &grid).unwrap();
    for &p in mesh.interior_cells() {
        assert_eq!(run.q.get(p, 1), 1.3);
    }
    assert!(run.log.max_defect() <= 1e-12);
}

#[test]
fn mac_step_matches_five_point_stencil() {
    let (nx, ny) = (12, 10);
    let mesh = rect(nx, ny);
    let (hx, hy) = (1.0 / nx as f64, 1.0 / ny as f64);
    let q0 = ScalarProfile::Bump { centre: [0.5, 0.5], radius: 0.3, height: 1.0, offset: 0.0 };
    let dt = 0.5 * hx;
    let c = cfg(q0, [1.0, 0.0], 0.5, dt);
    let grid = TimeGrid::uniform(dt, 1).unwrap();
    let run = run_mass_mac(&c, &mesh, &grid).unwrap();
    let id = |i: usize, j: usize| j * nx + i;
    let u0 = run.q.level(0);
    let u1 = run.q.level(1);
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let (c, w) = (u0[id(i, j)], u0[id(i - 1, j)]);
            // v = (1, 0): the east face carries the centre value, the west face the west value,
            // and the north and south faces carry no flux.
            let stencil = c - dt / (hx * hy) * (hy * c - hy * w);
            assert!((u1[id(i, j)] - stencil).abs() < 1e-15, "({i}, {j})");
        }
    }
}

#[test]
fn mac_mass_ledger_closes() {
    let mesh = PrimalMesh::build_cartesian(10, 8, BoxDomain::unit_square(), Some([1.1, 0.9])).unwrap();
    let c = SchemeConfig {
        q0: ScalarProfile::SinSinCos { amplitude: 0.5, offset: 1.0 },
        velocity: VectorProfile::Rotation { omega: 2.0, centre: [0.4, 0.6] },
        cfl: 0.7,
        policy: BoundaryPolicy::UpwindExteriorZero,
        final_time: 0.25,
    };
    let layout = Layout::build(LayoutKind::Mac, &mesh).unwrap();
    let grid = c.time_grid(&mesh, &layout).unwrap();
    let run = run_mass_mac(&c, &mesh, &grid).unwrap();
    assert!(run.log.max_defect() <= 1e-12, "{}", run.log.max_defect());
    assert!(run.log.to_csv().lines().count() == grid.n_steps() + 1);
}

#[test]
fn manufactured_constants_and_affine() {
    let mesh = rect(4, 3);
    let grid = TimeGrid::uniform(1.0, 2).unwrap();
    for kind in [LayoutKind::Rt, LayoutKind::Mac] {
        let layout = Layout::build(kind, &mesh).unwrap();
        let m = sample_manufactured(
            &ScalarProfile::Constant { value: 2.5 },
            &VectorProfile::Constant { value: [0.5, -1.0] },
            &layout,
            &mesh,
            &grid,
            4,
        )
        .unwrap();
        assert!((0..3).all(|n| m.q.level(n).iter().all(|&v| v == 2.5)));
        for z in 0..mesh.n_faces() {
            let full = m.v.vector(&layout, z, 1);
            match kind {
                LayoutKind::Rt => assert_eq!(full, [0.5, -1.0]),
                _ => {
                    let Layout::Mac(d) = &layout else { unreachable!() };
                    let i = d.direction(z).index();
                    assert_eq!(full[i], [0.5, -1.0][i]);
                    assert_eq!(full[1 - i], 0.0);
                }
            }
        }
    }
    let layout = Layout::build(LayoutKind::Mac, &mesh).unwrap();
    let m = sample_manufactured(
        &ScalarProfile::Affine { c0: 0.0, gradient: [1.0, 0.0], rate: 0.0 },
        &VectorProfile::Constant { value: [0.0, 0.0] },
        &layout,
        &mesh,
        &grid,
        4,
    )
    .unwrap();
    for p in 0..mesh.n_cells() {
        assert!((m.q.get(p, 0) - mesh.cell(p).centroid[0]).abs() < 1e-15);
    }
    let rot = VectorProfile::Rotation { omega: 1.0, centre: [0.0, 0.0] };
    assert!(matches!(
        sample_velocity(&rot, &Layout::Colocated1d, &PrimalMesh::interval(3, 0.0, 1.0).unwrap(), &grid),
        Err(crate::error::FvError::Parameter(_))
    ));
}

#[test]
fn manufactured_l1_distance_decays() {
    let q = ScalarProfile::SinSinCos { amplitude: 1.0, offset: 0.0 };
    let v = VectorProfile::Constant { value: [1.0, 0.5] };
    let mut errs = Vec::new();
    for k in [8usize, 16, 32] {
        let mesh = rect(k, k);
        let grid = TimeGrid::uniform(1.0, k).unwrap();
        let layout = Layout::build(LayoutKind::Mac, &mesh).unwrap();
        let m = sample_manufactured(&q, &v, &layout, &mesh, &grid, 4).unwrap();
        let d = lp_distance(&m.q, |x, t| q.eval(2, x, t), &mesh, &grid, 4).unwrap();
        errs.push(d.l1);
        assert!(matches!(m.v, Velocity::Mac(_)));
    }
    for w in errs.windows(2) {
        let slope = (w[0] / w[1]).log2();
        assert!((0.9..2.2).contains(&slope), "{errs:?}");
    }
}

#[test]
fn transported_profile_uses_exterior_value() {
    let q0 = ScalarProfile::Affine { c0: 1.0, gradient: [1.0, 0.0], rate: 0.0 };
    let d = BoxDomain::interval(0.0, 1.0);
    assert_eq!(q0.transported(1, &d, [1.0, 0.0], 0.0, [0.75, 0.0], 0.5), 1.25);
    assert_eq!(q0.transported(1, &d, [1.0, 0.0], 0.0, [0.25, 0.0], 0.5), 0.0);
}

#[test]
fn affine_velocity_profile() {
    let v = VectorProfile::Affine { value: [1.0, -1.0], gradient: [[0.5, 0.0], [0.25, -2.0]] };
    assert_eq!(v.eval([2.0, 1.0], 0.3), [2.0, -2.5]);
    assert_eq!(v.constant_value(), None);
    let c = VectorProfile::Affine { value: [1.0, -1.0], gradient: [[0.0; 2]; 2] };
    assert_eq!(c.constant_value(), Some([1.0, -1.0]));
}
