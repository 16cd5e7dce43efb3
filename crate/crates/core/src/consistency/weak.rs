//! Limit of the weak form for closed-form `(q̄, v̄)` and the discrete gap to it.

use crate::exec::{map_range, pairwise_sum};
use crate::fields::{InterpolatedTest, TestFunction};
use crate::geometry::{Point, PrimalMesh, TimeGrid};
use crate::operators::{Convection, NonlinearityPair};
use crate::quadrature::{GaussLegendre, ORACLE_ORDER};

use super::level_sum;

/// Closed-form limit fields.
#[derive(Clone, Copy)]
pub struct ExactSolution<'a> {
    pub q: &'a (dyn Fn(Point, f64) -> f64 + Sync),
    pub v: &'a (dyn Fn(Point, f64) -> Point + Sync),
}

impl std::fmt::Debug for ExactSolution<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("ExactSolution")
    }
}

/// The two parts of `−∫ β(q̄(·,0)) φ(·,0) − ∫∫ (β(q̄) ∂_t φ + g(q̄) v̄·∇φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakLimit {
    /// `−∫ β(q̄(·,0)) φ(·,0) − ∫∫ β(q̄) ∂_t φ`.
    pub x1: f64,
    /// `−∫∫ g(q̄) v̄·∇φ`.
    pub x2: f64,
}

impl WeakLimit {
    pub fn rhs(&self) -> f64 {
        self.x1 + self.x2
    }
}

fn composite(rule: &GaussLegendre, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            rule.mapped(lo, hi).collect::<Vec<_>>()
        })
        .collect()
}

/// Composite Gauss-Legendre of order 8 with `panels` panels per axis over
/// the support of `φ` intersected with `Ω × (0, T)`.
pub fn weak_limit(
    exact: ExactSolution<'_>,
    pair: &NonlinearityPair,
    phi: &dyn TestFunction,
    mesh: &PrimalMesh,
    final_time: f64,
    panels: usize,
) -> WeakLimit {
    let Some(s) = phi.support() else { return WeakLimit { x1: 0.0, x2: 0.0 } };
    let panels = panels.max(1);
    let rule = GaussLegendre::new(ORACLE_ORDER);
    let dom = mesh.domain();
    let axis = |k: usize| composite(&rule, s.lo[k].max(dom.lo[k]), s.hi[k].min(dom.hi[k]), panels);
    let xs = axis(0);
    let space: Vec<(Point, f64)> = if mesh.dim() == 1 {
        xs.iter().map(|&(x, w)| ([x, 0.0], w)).collect()
    } else {
        let ys = axis(1);
        ys.iter().flat_map(|&(y, wy)| xs.iter().map(move |&(x, wx)| ([x, y], wx * wy))).collect()
    };
    let (t0, t1) = (s.t_lo.max(0.0), s.t_hi.min(final_time));
    let times = if t1 > t0 { composite(&rule, t0, t1, panels) } else { Vec::new() };

    let slabs: Vec<(f64, f64)> = map_range(times.len(), |i| {
        let (t, wt) = times[i];
        let mut a = 0.0;
        let mut b = 0.0;
        for &(x, w) in &space {
            let qb = (exact.q)(x, t);
            let vb = (exact.v)(x, t);
            let g = phi.grad(x, t);
            a += w * pair.beta.eval(qb) * phi.dt(x, t);
            b += w * pair.g.eval(qb) * (vb[0] * g[0] + vb[1] * g[1]);
        }
        (wt * a, wt * b)
    });
    let initial = if s.contains_time(0.0) {
        let terms: Vec<f64> = space.iter().map(|&(x, w)| w * pair.beta.eval((exact.q)(x, 0.0)) * phi.value(x, 0.0)).collect();
        pairwise_sum(&terms)
    } else {
        0.0
    };
    let a = pairwise_sum(&slabs.iter().map(|s| s.0).collect::<Vec<_>>());
    let b = pairwise_sum(&slabs.iter().map(|s| s.1).collect::<Vec<_>>());
    WeakLimit { x1: -initial - a, x2: -b }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakGap {
    /// `Σ_n δt_n Σ_{P∈P_int} |P| C(U)_P^n φ_P^n`.
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

pub fn weak_form_gap(
    conv: &Convection,
    phi: &InterpolatedTest,
    limit: &WeakLimit,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
) -> WeakGap {
    let c = &conv.values;
    let lhs = level_sum(grid.n_steps(), |n| grid.step(n), mesh.interior_cells(), |p, n| {
        mesh.cell(p).measure * c.get(p, n) * phi.cell(p, n)
    });
    let rhs = limit.rhs();
    WeakGap { lhs, rhs, gap: (lhs - rhs).abs() }
}
