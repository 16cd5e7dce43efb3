//! Weak-consistency quantities: the `X1`/`X2` split of the weak form, the
//! hypothesis residuals, the staggered jump sums, the weak-form gap, and
//! refinement studies with rate fits.

mod decompose;
mod identities;
mod rates;
mod residuals;
mod study;
mod weak;

pub use decompose::{compute_x1, compute_x2, X1Value, X2Value, X1_ROUTE_TOL, X2_ROUTE_TOL};
pub use identities::{check_level, check_mesh, IdentityCheck, PARTITION_TOL};
pub use rates::RateFit;
pub use residuals::{
    flux_constant, jump_sums, residual_flux, residual_init, residual_time, InitResidual, JumpSums, TimeResidual,
};
pub use study::{
    audit_regularity, rates_csv, report_csv, run_study, setup_level, FieldSource, LevelReport, LevelSetup, MeshFamily,
    Numerics, Study, StudyConfig, TestSpec, TimeSpec, RATE_SERIES, REPORT_COLUMNS,
};
pub use weak::{weak_form_gap, weak_limit, ExactSolution, WeakGap, WeakLimit};

use crate::exec::{map_range, pairwise_sum};
use crate::fields::CellScalarField;
use crate::operators::{Layout, NonlinearityPair, Velocity};

/// Discrete unknowns `U = (q, v)` with their layout and nonlinearities.
#[derive(Debug, Clone, Copy)]
pub struct Unknowns<'a> {
    pub q: &'a CellScalarField,
    pub v: &'a Velocity,
    pub layout: &'a Layout,
    pub pair: &'a NonlinearityPair,
}

/// `Σ_n w(n) Σ_{p ∈ cells} f(p, n)`: a pairwise sum over `cells` (in the
/// given order) per level, then a pairwise sum of the weighted level sums.
pub fn level_sum<W, F>(levels: usize, weight: W, cells: &[usize], f: F) -> f64
where
    W: Fn(usize) -> f64,
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let per_level: Vec<f64> =
        map_range(levels, |n| pairwise_sum(&cells.iter().map(|&p| f(p, n)).collect::<Vec<_>>()));
    let weighted: Vec<f64> = per_level.iter().enumerate().map(|(n, s)| weight(n) * s).collect();
    pairwise_sum(&weighted)
}
