//! Refinement studies: configuration, regularity audit, per-level reports,
//! rate fits and CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::exec::{map_range, pairwise_sum};
use crate::fields::{
    interpolate_test, lp_distance, translate_functional, Bump, CellScalarField, FaceStepWeights, InterpVariant,
    TestFunction, ZeroTest,
};
use crate::geometry::{BoxDomain, MeshRegularity, Point, PrimalMesh, StepPattern, TimeGrid};
use crate::operators::{
    assemble_convection, conservation_defect, flux_staggered, BoundaryPolicy, FaceScheme, Layout, LayoutKind,
    Nonlinearity, NonlinearityPair, Velocity,
};
use crate::quadrature::DEFAULT_ORDER;
use crate::schemes::{run_mass_mac, run_upwind_1d, sample_manufactured, ScalarProfile, SchemeConfig, VectorProfile};

use super::{
    compute_x1, compute_x2, flux_constant, jump_sums, residual_flux, residual_init, residual_time, weak_form_gap,
    weak_limit, ExactSolution, RateFit, Unknowns, WeakLimit,
};

fn one() -> f64 {
    1.0
}

fn unit_lo() -> Point {
    [0.0, 0.0]
}

fn unit_hi() -> Point {
    [1.0, 1.0]
}

fn no_grading() -> [f64; 2] {
    [1.0, 1.0]
}

/// Mesh sequence; level `m` has `2^m` times the base cell count per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshFamily {
    /// Rectangles; the grading ratio of level `m` along axis `k` is
    /// `grading[k]^(1/2^m) · grading_growth[k]^m`, so unit growth keeps the family regular.
    Cartesian {
        n: [usize; 2],
        #[serde(default = "unit_lo")]
        lo: Point,
        #[serde(default = "unit_hi")]
        hi: Point,
        #[serde(default = "no_grading")]
        grading: [f64; 2],
        #[serde(default = "no_grading")]
        grading_growth: [f64; 2],
    },
    /// Uniform quadrangles with randomly moved interior vertices; level `m` uses `seed + m`.
    Perturbed {
        n: [usize; 2],
        #[serde(default = "unit_lo")]
        lo: Point,
        #[serde(default = "unit_hi")]
        hi: Point,
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    Interval {
        n: usize,
        #[serde(default)]
        a: f64,
        #[serde(default = "one")]
        b: f64,
    },
}

impl MeshFamily {
    pub fn dim(&self) -> usize {
        match self {
            Self::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Cells along the first axis at level 0.
    pub fn base_cells(&self) -> usize {
        match self {
            Self::Cartesian { n, .. } | Self::Perturbed { n, .. } => n[0],
            Self::Interval { n, .. } => *n,
        }
    }

    pub fn build(&self, level: usize) -> Result<PrimalMesh> {
        let k = 1usize << level;
        match *self {
            Self::Cartesian { n, lo, hi, grading, grading_growth } => {
                let exp = 1.0 / k as f64;
                let growth = grading_growth.map(|g| g.powi(level as i32));
                let ratio = [grading[0].powf(exp) * growth[0], grading[1].powf(exp) * growth[1]];
                let grading = (ratio != [1.0, 1.0]).then_some(ratio);
                PrimalMesh::build_cartesian(n[0] * k, n[1] * k, BoxDomain::new(lo, hi), grading)
            }
            Self::Perturbed { n, lo, hi, amplitude, seed } => {
                PrimalMesh::build_perturbed_quads(n[0] * k, n[1] * k, BoxDomain::new(lo, hi), amplitude, seed + level as u64)
            }
            Self::Interval { n, a, b } => PrimalMesh::interval(n * k, a, b),
        }
    }

    pub fn set_seed(&mut self, s: u64) {
        if let Self::Perturbed { seed, .. } = self {
            *seed = s;
        }
    }
}

/// Steps at level 0 (doubling with the level); defaults to the level-0 cell
/// count along the first axis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default)]
    pub pattern: StepPattern,
}

/// Where the discrete unknowns come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSource {
    /// Cell means of `q̄` at every `t_n`, `v̄` at face midpoints.
    Manufactured { q: ScalarProfile, v: VectorProfile },
    /// Explicit upwind run of the mass equation (`β = g = id`) from `q0`, on a
    /// 1D colocated or MAC layout; the time grid follows from `cfl`. With a
    /// constant velocity the limit is `q0` transported with exterior value 0.
    Scheme { q0: ScalarProfile, velocity: VectorProfile, cfl: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestSpec {
    /// Bump on the middle half of `Ω` along each axis, time factor centred at 0.
    #[default]
    Centred,
    Bump { space: [[f64; 2]; 2], time: [f64; 2] },
    Zero,
}

impl TestSpec {
    pub fn build(&self, mesh: &PrimalMesh, final_time: f64) -> Result<Box<dyn TestFunction>> {
        Ok(match *self {
            Self::Centred => Box::new(Bump::centred(mesh, final_time)?),
            Self::Bump { space, time } => Box::new(Bump::new(mesh.dim(), space, time)?),
            Self::Zero => Box::new(ZeroTest { dim: mesh.dim() }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Gauss-Legendre order of sampling, interpolation and residual quadrature.
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
    /// Panels per axis of the weak-limit quadrature.
    #[serde(default = "default_panels")]
    pub rhs_panels: usize,
    /// Largest admissible `θ1`, `θ2`, `θ3`.
    #[serde(default = "default_bound")]
    pub regularity_bound: f64,
    /// `θ` of the translate weights `ω_σ = θ min(|K|, |L|)`.
    #[serde(default = "one")]
    pub translate_theta: f64,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_panels() -> usize {
    16
}

fn default_bound() -> f64 {
    10.0
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            quadrature_order: default_order(),
            rhs_panels: default_panels(),
            regularity_bound: default_bound(),
            translate_theta: 1.0,
        }
    }
}

fn default_levels() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub mesh: MeshFamily,
    #[serde(default = "default_levels")]
    pub levels: usize,
    pub final_time: f64,
    #[serde(default)]
    pub time: TimeSpec,
    pub layout: LayoutKind,
    pub beta: Nonlinearity,
    pub g: Nonlinearity,
    pub face_scheme: FaceScheme,
    #[serde(default)]
    pub boundary: BoundaryPolicy,
    pub source: FieldSource,
    #[serde(default)]
    pub test_function: TestSpec,
    #[serde(default)]
    pub interpolation: InterpVariant,
    #[serde(default)]
    pub numerics: Numerics,
    /// Minimum finest-pair slope per rate series.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub thresholds: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl StudyConfig {
    pub fn pair(&self) -> NonlinearityPair {
        NonlinearityPair::new(self.beta, self.g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FvError::Parameter(m));
        if self.levels < RateFit::MIN_LEVELS {
            return bad(format!("a study needs at least {} levels, got {}", RateFit::MIN_LEVELS, self.levels));
        }
        if self.levels > 12 {
            return bad(format!("{} levels is beyond what a study can hold", self.levels));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad(format!("final time {} must be positive", self.final_time));
        }
        if self.time.steps == Some(0) {
            return bad("time.steps must be positive".into());
        }
        if !(1..=16).contains(&self.numerics.quadrature_order) {
            return bad(format!("quadrature order {} outside 1..=16", self.numerics.quadrature_order));
        }
        if self.numerics.rhs_panels == 0 {
            return bad("numerics.rhs_panels must be positive".into());
        }
        if !(self.numerics.translate_theta >= 0.0) {
            return bad(format!("translate theta {} must be non-negative", self.numerics.translate_theta));
        }
        self.face_scheme.validate()?;
        let needs_dim = match self.layout {
            LayoutKind::Colocated1d => 1,
            LayoutKind::Rt | LayoutKind::Mac => 2,
        };
        if self.mesh.dim() != needs_dim {
            return bad(format!("layout {:?} needs a {needs_dim}D mesh family", self.layout));
        }
        match &self.source {
            FieldSource::Manufactured { v, .. } => {
                if self.layout == LayoutKind::Colocated1d && v.constant_value().is_none() {
                    return bad("the colocated layout needs a constant velocity".into());
                }
            }
            FieldSource::Scheme { cfl, .. } => {
                if self.pair() != NonlinearityPair::mass() {
                    return bad("scheme sources solve the mass equation: beta and g must be id".into());
                }
                if self.face_scheme != FaceScheme::Upwind {
                    return bad("scheme sources use the upwind face scheme".into());
                }
                if self.layout == LayoutKind::Rt {
                    return bad("scheme sources run on the colocated1d or mac layout".into());
                }
                if !(*cfl > 0.0 && *cfl <= 1.0) {
                    return bad(format!("CFL number {cfl} outside (0, 1]"));
                }
            }
        }
        for name in self.thresholds.keys() {
            if !RATE_SERIES.contains(&name.as_str()) {
                return bad(format!("unknown threshold series '{name}' (known: {})", RATE_SERIES.join(", ")));
            }
        }
        Ok(())
    }

    fn scheme_config(&self) -> Option<SchemeConfig> {
        match &self.source {
            FieldSource::Scheme { q0, velocity, cfl } => Some(SchemeConfig {
                q0: q0.clone(),
                velocity: velocity.clone(),
                cfl: *cfl,
                policy: self.boundary,
                final_time: self.final_time,
            }),
            FieldSource::Manufactured { .. } => None,
        }
    }

    /// `q̄(·, 0)`.
    fn initial(&self) -> &ScalarProfile {
        match &self.source {
            FieldSource::Manufactured { q, .. } => q,
            FieldSource::Scheme { q0, .. } => q0,
        }
    }
}

/// Mesh, time grid, layout and regularity of one study level.
#[derive(Debug, Clone)]
pub struct LevelSetup {
    pub mesh: PrimalMesh,
    pub grid: TimeGrid,
    pub layout: Layout,
    pub regularity: MeshRegularity,
}

pub fn setup_level(cfg: &StudyConfig, level: usize) -> Result<LevelSetup> {
    let mesh = cfg.mesh.build(level)?;
    let layout = Layout::build(cfg.layout, &mesh)?;
    let grid = match cfg.scheme_config() {
        Some(s) => s.time_grid(&mesh, &layout)?,
        None => {
            let steps = cfg.time.steps.unwrap_or_else(|| cfg.mesh.base_cells()) << level;
            TimeGrid::build(cfg.final_time, steps, cfg.time.pattern)?
        }
    };
    let mut regularity = MeshRegularity::compute(&mesh, &grid);
    if let Layout::Mac(d) = &layout {
        regularity = regularity.with_mac(d);
    }
    Ok(LevelSetup { mesh, grid, layout, regularity })
}

/// Fails on the first level where `θ1`, `θ2` or `θ3` exceeds `bound`, naming
/// every parameter above it.
pub fn audit_regularity(levels: &[MeshRegularity], bound: f64) -> Result<()> {
    for (m, r) in levels.iter().enumerate() {
        let named = [("θ1", r.theta1), ("θ2", r.theta2), ("θ3", r.theta3)];
        let over: Vec<_> = named.iter().filter(|(_, v)| !(*v <= bound)).collect();
        if !over.is_empty() {
            let names = over.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ");
            let detail = over.iter().map(|(n, v)| format!("{n} = {v}")).collect::<Vec<_>>().join(", ");
            return Err(FvError::Regularity { names, detail, bound, level: m });
        }
    }
    Ok(())
}

macro_rules! report {
    ($($(#[$doc:meta])* $field:ident => $name:literal),* $(,)?) => {
        /// One row of the study report. Undefined quantities are NaN.
        #[derive(Debug, Clone, PartialEq)]
        pub struct LevelReport {
            pub level: usize,
            $($(#[$doc])* pub $field: f64,)*
        }

        /// Header of the report CSV, in column order.
        pub const REPORT_COLUMNS: &[&str] = &["level", $($name),*];

        impl LevelReport {
            fn values(&self) -> Vec<f64> {
                vec![$(self.$field),*]
            }

            /// Value of a column by its CSV name.
            pub fn get(&self, column: &str) -> Option<f64> {
                match column {
                    "level" => Some(self.level as f64),
                    $($name => Some(self.$field),)*
                    _ => None,
                }
            }
        }
    };
}

report! {
    /// `δ(P)`.
    h => "h",
    /// Largest time step.
    dt => "dt",
    theta1 => "theta1",
    theta2 => "theta2",
    theta3 => "theta3",
    x1 => "X1",
    x2 => "X2",
    /// Signed initialization residual.
    res_init => "res_init",
    /// Majorant of the time residual.
    res_time => "res_time",
    res_flux => "res_flux",
    r1 => "R1",
    r2 => "R2",
    translate => "translate",
    weak_gap => "weak_gap",
    /// `‖q‖_∞` over all levels.
    sup_norm => "sup_norm",
    /// MAC quasi-uniformity `θ(P)`.
    theta_mac => "theta_mac",
    n_cells => "n_cells",
    n_steps => "n_steps",
    x1_by_parts => "X1_by_parts",
    /// Gradient route plus remainder.
    x2_gradient => "X2_gradient",
    x2_route_gap => "X2_route_gap",
    res_init_majorant => "res_init_majorant",
    res_time_signed => "res_time_signed",
    r1_faces => "R1_faces",
    r2_direct => "R2_direct",
    r2_x => "R2_x",
    r2_y => "R2_y",
    /// `C` of `R ≤ C (R1 + R2)`.
    flux_constant => "flux_constant",
    /// Largest relative interior telescoping defect over the levels.
    conservation => "conservation_defect",
    weak_lhs => "weak_lhs",
    weak_rhs => "weak_rhs",
    /// `|X1 − x1 limit|`.
    x1_gap => "X1_gap",
    /// `|X2 − x2 limit|`.
    x2_gap => "X2_gap",
    v_sup_norm => "v_sup_norm",
    /// `‖q − q̄‖_{L¹}` when the limit is known.
    l1_error => "l1_error",
    /// `‖q^(m) − q^(m−1)‖_{L¹}`: a diagnostic surrogate for the L¹ convergence
    /// hypothesis, not the hypothesis itself.
    l1_cauchy => "l1_cauchy_surrogate",
    /// Largest estimated quadrature error of manufactured sampling.
    sampling_error => "sampling_error",
    /// Scheme sources: largest relative mass-ledger defect per step.
    mass_defect => "mass_defect",
    /// Scheme sources: how far `q` leaves the range of its initial data.
    range_excess => "range_excess",
    /// 1 when every signed residual is below its majorant.
    majorants_ok => "majorants_ok",
}

/// Series with a rate fit, in `rates.csv` order.
pub const RATE_SERIES: &[&str] = &[
    "res_init",
    "res_init_majorant",
    "res_time",
    "res_time_signed",
    "res_flux",
    "R1",
    "R2",
    "translate",
    "weak_gap",
    "X1_gap",
    "X2_gap",
    "l1_error",
    "l1_cauchy_surrogate",
];

const INTEGER_COLUMNS: &[&str] = &["level", "n_cells", "n_steps", "majorants_ok"];

#[derive(Debug, Clone)]
pub struct Study {
    pub reports: Vec<LevelReport>,
    pub rates: Vec<RateFit>,
}

impl Study {
    pub fn rate(&self, series: &str) -> Option<&RateFit> {
        self.rates.iter().find(|r| r.series == series)
    }

    /// `(series, required, observed)` for every threshold whose finest-pair
    /// slope is below the requirement or undefined.
    pub fn threshold_failures(&self, thresholds: &BTreeMap<String, f64>) -> Vec<(String, f64, f64)> {
        thresholds
            .iter()
            .filter_map(|(name, &min)| {
                let got = self.rate(name).map_or(f64::NAN, RateFit::finest_pair);
                (!(got >= min)).then(|| (name.clone(), min, got))
            })
            .collect()
    }
}

struct LevelOutput {
    report: LevelReport,
    q: CellScalarField,
}

type ScalarFn = Box<dyn Fn(Point, f64) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(Point, f64) -> Point + Send + Sync>;

fn exact_fields(cfg: &StudyConfig, domain: BoxDomain) -> Option<(ScalarFn, VectorFn)> {
    let dim = cfg.mesh.dim();
    match cfg.source.clone() {
        FieldSource::Manufactured { q, v } => {
            Some((Box::new(move |x, t| q.eval(dim, x, t)), Box::new(move |x, t| v.eval(x, t))))
        }
        FieldSource::Scheme { q0, velocity, .. } => {
            let s = velocity.constant_value()?;
            Some((Box::new(move |x, t| q0.transported(dim, &domain, s, 0.0, x, t)), Box::new(move |_, _| s)))
        }
    }
}

fn nan_if(cond: bool, v: f64) -> f64 {
    if cond {
        v
    } else {
        f64::NAN
    }
}

pub(super) struct LevelFields {
    pub q: CellScalarField,
    pub v: Velocity,
    pub sampling_error: f64,
    pub mass_defect: f64,
    pub range_excess: f64,
}

/// Samples the manufactured fields or runs the scheme on one level.
pub(super) fn level_fields(cfg: &StudyConfig, s: &LevelSetup) -> Result<LevelFields> {
    let (mesh, grid, layout) = (&s.mesh, &s.grid, &s.layout);
    let order = cfg.numerics.quadrature_order;
    Ok(match cfg.scheme_config() {
        None => {
            let FieldSource::Manufactured { q, v } = &cfg.source else { unreachable!() };
            let m = sample_manufactured(q, v, layout, mesh, grid, order)?;
            LevelFields { q: m.q, v: m.v, sampling_error: m.discrepancy, mass_defect: f64::NAN, range_excess: f64::NAN }
        }
        Some(sc) => {
            let run = match layout {
                Layout::Colocated1d => run_upwind_1d(&sc, mesh, grid)?,
                _ => run_mass_mac(&sc, mesh, grid)?,
            };
            let (lo0, hi0) = run.log.initial_range;
            let (lo, hi) = run.log.range;
            let excess = (lo0 - lo).max(hi - hi0).max(0.0);
            LevelFields { q: run.q, v: run.v, sampling_error: f64::NAN, mass_defect: run.log.max_defect(), range_excess: excess }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn level_report(
    cfg: &StudyConfig,
    level: usize,
    s: &LevelSetup,
    phi: &dyn TestFunction,
    exact: Option<ExactSolution<'_>>,
    limit: Option<&WeakLimit>,
) -> Result<LevelOutput> {
    let (mesh, grid, layout) = (&s.mesh, &s.grid, &s.layout);
    let order = cfg.numerics.quadrature_order;
    let pair = cfg.pair();
    let dim = mesh.dim();

    let LevelFields { q, v, sampling_error, mass_defect, range_excess } = level_fields(cfg, s)?;
    let u = Unknowns { q: &q, v: &v, layout, pair: &pair };
    let betas = q.map(|x| pair.beta.eval(x));
    let flux = flux_staggered(&q, &v, layout, mesh, &pair, cfg.face_scheme, cfg.boundary)?;
    let conv = assemble_convection(&betas, &flux, mesh, grid)?;
    let mut conservation: f64 = 0.0;
    for n in 0..grid.n_steps() {
        let (d, scale) = conservation_defect(&flux, mesh, n)?;
        if scale > 0.0 {
            conservation = conservation.max(d / scale);
        }
    }
    let interp = interpolate_test(phi, mesh, grid, cfg.interpolation, order)?;
    let x1 = compute_x1(&betas, &interp, mesh, grid)?;
    let x2 = compute_x2(&flux, u, &interp, mesh, grid)?;
    let q0 = cfg.initial();
    let init = residual_init(&q, &|x| q0.eval(dim, x, 0.0), phi, mesh, &pair, order)?;
    let time = residual_time(&q, phi, &pair, mesh, grid, order)?;
    let res_flux = residual_flux(&flux, u, mesh, grid)?;
    let jumps = jump_sums(u, mesh, grid)?;
    let c = flux_constant(u, grid);
    let translate =
        translate_functional(&q, mesh, grid, &FaceStepWeights::min_measure(mesh, grid, cfg.numerics.translate_theta))?
            .value;
    let weak = limit.map(|l| weak_form_gap(&conv, &interp, l, mesh, grid));
    let l1_error = match exact {
        Some(e) => lp_distance(&q, |x, t| (e.q)(x, t), mesh, grid, order)?.l1,
        None => f64::NAN,
    };

    let slack = 1.0 + 1e-9;
    let majorants_ok = time.signed.abs() <= time.majorant * slack
        && init.signed.abs() <= phi.sup_norm() * init.majorant * slack
        && res_flux <= c * (jumps.r1 + jumps.r2) * slack;
    let r2_parts = jumps.r2_by_direction;
    let report = LevelReport {
        level,
        h: mesh.space_step(),
        dt: grid.max_step(),
        theta1: s.regularity.theta1,
        theta2: s.regularity.theta2,
        theta3: s.regularity.theta3,
        x1: x1.direct,
        x2: x2.direct,
        res_init: init.signed,
        res_time: time.majorant,
        res_flux,
        r1: jumps.r1,
        r2: jumps.r2,
        translate,
        weak_gap: weak.map_or(f64::NAN, |w| w.gap),
        sup_norm: q.sup_norm(),
        theta_mac: s.regularity.theta_mac.unwrap_or(f64::NAN),
        n_cells: mesh.n_cells() as f64,
        n_steps: grid.n_steps() as f64,
        x1_by_parts: x1.by_parts,
        x2_gradient: x2.gradient + x2.remainder,
        x2_route_gap: x2.route_gap(),
        res_init_majorant: init.majorant,
        res_time_signed: time.signed,
        r1_faces: jumps.r1_faces,
        r2_direct: jumps.r2_direct,
        r2_x: nan_if(r2_parts.is_some(), r2_parts.map_or(0.0, |p| p[0])),
        r2_y: nan_if(r2_parts.is_some(), r2_parts.map_or(0.0, |p| p[1])),
        flux_constant: c,
        conservation,
        weak_lhs: weak.map_or(f64::NAN, |w| w.lhs),
        weak_rhs: weak.map_or(f64::NAN, |w| w.rhs),
        x1_gap: limit.map_or(f64::NAN, |l| (x1.direct - l.x1).abs()),
        x2_gap: limit.map_or(f64::NAN, |l| (x2.direct - l.x2).abs()),
        v_sup_norm: v.sup_norm(),
        l1_error,
        l1_cauchy: f64::NAN,
        sampling_error,
        mass_defect,
        range_excess,
        majorants_ok: if majorants_ok { 1.0 } else { 0.0 },
    };
    Ok(LevelOutput { report, q })
}

/// `Σ_P Σ_n |P| δt_n |q_f − q_c|` with the coarse values read at the fine
/// cell centroid and step midpoint. Exact for nested space-time grids.
fn cauchy_l1(fine: (&CellScalarField, &PrimalMesh, &TimeGrid), coarse: (&CellScalarField, &PrimalMesh, &TimeGrid)) -> f64 {
    let (qf, mf, gf) = fine;
    let (qc, mc, gc) = coarse;
    let Some(lat) = mc.lattice() else { return f64::NAN };
    let cells = map_range(mf.n_cells(), |p| {
        let pc = lat.locate(mf.cell(p).centroid);
        let terms: Vec<f64> = (0..gf.n_steps())
            .map(|n| {
                let nc = gc.locate(0.5 * (gf.t(n) + gf.t(n + 1)));
                gf.step(n) * (qf.get(p, n) - qc.get(pc, nc)).abs()
            })
            .collect();
        mf.cell(p).measure * pairwise_sum(&terms)
    });
    pairwise_sum(&cells)
}

/// Runs every level (in parallel) after the regularity audit, then fits rates.
pub fn run_study(cfg: &StudyConfig) -> Result<Study> {
    cfg.validate()?;
    let setups = map_range(cfg.levels, |m| setup_level(cfg, m)).into_iter().collect::<Result<Vec<_>>>()?;
    let regs: Vec<MeshRegularity> = setups.iter().map(|s| s.regularity).collect();
    audit_regularity(&regs, cfg.numerics.regularity_bound)?;

    let mesh0 = &setups[0].mesh;
    let phi = cfg.test_function.build(mesh0, cfg.final_time)?;
    let fields = exact_fields(cfg, *mesh0.domain());
    let exact = fields.as_ref().map(|(q, v)| ExactSolution { q: q.as_ref(), v: v.as_ref() });
    let pair = cfg.pair();
    let limit =
        exact.map(|e| weak_limit(e, &pair, phi.as_ref(), mesh0, cfg.final_time, cfg.numerics.rhs_panels));

    let outputs = map_range(cfg.levels, |m| level_report(cfg, m, &setups[m], phi.as_ref(), exact, limit.as_ref()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut reports: Vec<LevelReport> = outputs.iter().map(|o| o.report.clone()).collect();
    for m in 1..reports.len() {
        reports[m].l1_cauchy = cauchy_l1(
            (&outputs[m].q, &setups[m].mesh, &setups[m].grid),
            (&outputs[m - 1].q, &setups[m - 1].mesh, &setups[m - 1].grid),
        );
    }
    let x: Vec<f64> = reports.iter().map(|r| r.h + r.dt).collect();
    let rates = RATE_SERIES
        .iter()
        .map(|name| {
            let y: Vec<f64> = reports.iter().map(|r| r.get(name).unwrap()).collect();
            RateFit::fit(name, &x, &y)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Study { reports, rates })
}

fn fmt_value(column: &str, v: f64) -> String {
    if INTEGER_COLUMNS.contains(&column) && v.is_finite() {
        format!("{}", v as i64)
    } else if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn report_csv(reports: &[LevelReport]) -> String {
    let mut s = REPORT_COLUMNS.join(",");
    s.push('\n');
    for r in reports {
        let mut cells = vec![r.level.to_string()];
        cells.extend(r.values().iter().zip(&REPORT_COLUMNS[1..]).map(|(v, c)| fmt_value(c, *v)));
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// `series,lsq_slope,finest_pair_slope,pair_1,…`; `pair_k` compares levels `k − 1` and `k`.
pub fn rates_csv(rates: &[RateFit]) -> String {
    let pairs = rates.iter().map(|r| r.pair_slopes.len()).max().unwrap_or(0);
    let mut s = String::from("series,lsq_slope,finest_pair_slope");
    for k in 1..=pairs {
        write!(s, ",pair_{k}").unwrap();
    }
    s.push('\n');
    for r in rates {
        write!(s, "{},{},{}", r.series, fmt_value("", r.slope), fmt_value("", r.finest_pair())).unwrap();
        for k in 0..pairs {
            write!(s, ",{}", fmt_value("", r.pair_slopes.get(k).copied().unwrap_or(f64::NAN))).unwrap();
        }
        s.push('\n');
    }
    s
}
