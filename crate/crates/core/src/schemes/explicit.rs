//! Manufactured sampling and explicit first-order upwind schemes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::exec::{map_range, pairwise_sum};
use crate::fields::{sample_cell_means, CellScalarField, FaceScalarField, FaceVectorField};
use crate::geometry::{PrimalMesh, TimeGrid};
use crate::operators::{
    cell_flux_sum, flux_at_level, BoundaryPolicy, FaceScheme, FluxFamily, Layout, NonlinearityPair, Velocity,
};
use crate::quadrature::AdaptiveMean;

use super::profile::{ScalarProfile, VectorProfile};

/// Discrete `(q, v)` sampled from closed forms.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub q: CellScalarField,
    pub v: Velocity,
    /// Largest estimated quadrature error of the cell means.
    pub discrepancy: f64,
}

/// `q` by cell means at every `t_n`, `v` at face midpoints (RT: full vector,
/// MAC: normal component, colocated: the constant speed).
pub fn sample_manufactured(
    q: &ScalarProfile,
    v: &VectorProfile,
    layout: &Layout,
    mesh: &PrimalMesh,
    grid: &TimeGrid,
    order: usize,
) -> Result<Manufactured> {
    let dim = mesh.dim();
    let sampled = sample_cell_means(|x, t| q.eval(dim, x, t), mesh, grid, order)?;
    let v = sample_velocity(v, layout, mesh, grid)?;
    Ok(Manufactured { q: sampled.field, v, discrepancy: sampled.discrepancy })
}

/// Velocity unknowns at levels `0..=N`.
pub fn sample_velocity(v: &VectorProfile, layout: &Layout, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<Velocity> {
    let levels = grid.n_steps() + 1;
    let at = |z: usize, n: usize| v.eval(mesh.face(z).midpoint, grid.t(n));
    Ok(match layout {
        Layout::Colocated1d => Velocity::Speed(
            v.constant_value().ok_or_else(|| FvError::Parameter("colocated layout needs a constant velocity".into()))?,
        ),
        Layout::Rt(_) => Velocity::Rt(FaceVectorField::from_fn(mesh.n_faces(), levels, at)?),
        Layout::Mac(d) => {
            Velocity::Mac(FaceScalarField::from_fn(mesh.n_faces(), levels, |z, n| at(z, n)[d.direction(z).index()])?)
        }
    })
}

/// Parameters of an explicit run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub q0: ScalarProfile,
    pub velocity: VectorProfile,
    pub cfl: f64,
    #[serde(default)]
    pub policy: BoundaryPolicy,
    pub final_time: f64,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(FvError::Parameter(format!("CFL number {} outside (0, 1]", self.cfl)));
        }
        if !(self.final_time > 0.0) {
            return Err(FvError::Parameter(format!("final time {} must be positive", self.final_time)));
        }
        Ok(())
    }

    /// Uniform grid with the fewest steps that respect the CFL number for the
    /// velocity at `t = 0`.
    pub fn time_grid(&self, mesh: &PrimalMesh, layout: &Layout) -> Result<TimeGrid> {
        self.validate()?;
        let probe = TimeGrid::uniform(self.final_time, 1)?;
        let v = sample_velocity(&self.velocity, layout, mesh, &probe)?;
        let limit = cfl_limit(&v, layout, mesh, 0);
        let steps = if limit.is_finite() {
            ((self.final_time / (self.cfl * limit)) * (1.0 - 1e-12)).ceil().max(1.0) as usize
        } else {
            1
        };
        TimeGrid::uniform(self.final_time, steps)
    }
}

/// `min_P |P| / Σ_{ζ∈F(P)} |ζ| (v_ζ^n·n_{P,ζ})⁺` (infinite for a resting fluid).
pub fn cfl_limit(v: &Velocity, layout: &Layout, mesh: &PrimalMesh, n: usize) -> f64 {
    (0..mesh.n_cells()).fold(f64::INFINITY, |m, p| {
        let out: f64 = mesh
            .cell(p)
            .faces
            .iter()
            .map(|&z| {
                let vz = v.vector(layout, z, n);
                let nz = mesh.normal(p, z);
                mesh.face(z).measure * (vz[0] * nz[0] + vz[1] * nz[1]).max(0.0)
            })
            .sum();
        if out > 0.0 {
            m.min(mesh.cell(p).measure / out)
        } else {
            m
        }
    })
}

/// One line of the mass ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub cfl: f64,
    /// `Σ_P |P| q_P^{n+1}`.
    pub mass: f64,
    /// `Σ_{ζ⊂∂Ω} |ζ| F_ζ^n·n_out`.
    pub boundary_flux: f64,
    /// `|M^{n+1} − M^n + δt·boundary_flux|` relative to the magnitudes involved.
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub initial_mass: f64,
    pub steps: Vec<StepRecord>,
    pub initial_range: (f64, f64),
    pub range: (f64, f64),
}

impl RunLog {
    pub fn max_defect(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.defect))
    }

    pub fn max_cfl(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.cfl))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("step,t,dt,cfl,mass,boundary_flux,defect\n");
        for (n, r) in self.steps.iter().enumerate() {
            writeln!(s, "{n},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.dt, r.cfl, r.mass, r.boundary_flux, r.defect)
                .unwrap();
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SchemeRun {
    pub q: CellScalarField,
    pub v: Velocity,
    pub log: RunLog,
}

fn initial_means(q0: &ScalarProfile, mesh: &PrimalMesh) -> Result<Vec<f64>> {
    let quad = AdaptiveMean::new(4);
    let dim = mesh.dim();
    map_range(mesh.n_cells(), |p| Ok(quad.cell_mean(mesh, p, |x| q0.eval(dim, x, 0.0))?.mean)).into_iter().collect()
}

fn mass(q: &[f64], mesh: &PrimalMesh) -> (f64, f64) {
    let terms: Vec<f64> = q.iter().enumerate().map(|(p, v)| mesh.cell(p).measure * v).collect();
    let abs: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
    (pairwise_sum(&terms), pairwise_sum(&abs))
}

fn range(q: &[f64]) -> (f64, f64) {
    q.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// `q^{n+1} = q^n − δt_n (1/|P|) Σ_ζ |ζ| F_ζ^n·n_{P,ζ}` with upwind face values.
fn run_explicit(cfg: &SchemeConfig, v: Velocity, layout: &Layout, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<SchemeRun> {
    cfg.validate()?;
    let steps = grid.n_steps();
    v.check(layout, mesh, steps + 1)?;
    let mut cfls = Vec::with_capacity(steps);
    for n in 0..steps {
        let limit = cfl_limit(&v, layout, mesh, n);
        let dt = grid.step(n);
        if dt > cfg.cfl * limit * (1.0 + 1e-12) {
            return Err(FvError::Cfl { step: n, dt, limit: cfg.cfl * limit });
        }
        cfls.push(if limit.is_finite() { dt / limit } else { 0.0 });
    }
    let pair = NonlinearityPair::mass();
    let mut levels = vec![initial_means(&cfg.q0, mesh)?];
    let (m0, _) = mass(&levels[0], mesh);
    let initial_range = range(&levels[0]);
    let mut records = Vec::with_capacity(steps);
    for n in 0..steps {
        let qn = &levels[n];
        let fz = flux_at_level(qn, &v, layout, mesh, n, &pair, FaceScheme::Upwind, cfg.policy)?;
        let family = FluxFamily::from_fn(mesh, 1, |z, _| Some(fz[z]));
        let dt = grid.step(n);
        let next = map_range(mesh.n_cells(), |p| {
            Ok(qn[p] - dt * (cell_flux_sum(&family, mesh, p, 0)? / mesh.cell(p).measure))
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        let mut bterms = Vec::new();
        let mut fscale = Vec::new();
        for (z, f) in mesh.faces().iter().enumerate() {
            let [a, b] = fz[z];
            fscale.push(f.measure * (a * a + b * b).sqrt());
            if f.is_boundary() {
                bterms.push(f.measure * (a * f.normal[0] + b * f.normal[1]));
            }
        }
        let boundary_flux = pairwise_sum(&bterms);
        let (m_old, s_old) = mass(qn, mesh);
        let (m_new, s_new) = mass(&next, mesh);
        let scale = s_old.max(s_new) + dt * pairwise_sum(&fscale);
        let defect = if scale > 0.0 { (m_new - m_old + dt * boundary_flux).abs() / scale } else { 0.0 };
        records.push(StepRecord { t: grid.t(n + 1), dt, cfl: cfls[n], mass: m_new, boundary_flux, defect });
        levels.push(next);
    }
    let range = levels.iter().map(|l| range(l)).fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let q = CellScalarField::from_levels(levels)?;
    Ok(SchemeRun { q, v, log: RunLog { initial_mass: m0, steps: records, initial_range, range } })
}

/// First-order upwind scheme for `∂_t u + s ∂_x u = 0`, `s > 0`, on a 1D mesh.
pub fn run_upwind_1d(cfg: &SchemeConfig, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<SchemeRun> {
    if mesh.dim() != 1 {
        return Err(FvError::Parameter("the upwind scheme runs on a 1D mesh".into()));
    }
    let speed = cfg
        .velocity
        .constant_value()
        .filter(|s| s[0] > 0.0)
        .ok_or_else(|| FvError::Parameter("the 1D upwind scheme needs a constant positive speed".into()))?;
    run_explicit(cfg, Velocity::Speed([speed[0], 0.0]), &Layout::Colocated1d, mesh, grid)
}

/// Mass equation `∂_t ρ + div(ρ v̄) = 0` on a MAC grid with upwind face values.
pub fn run_mass_mac(cfg: &SchemeConfig, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<SchemeRun> {
    let layout = Layout::build(crate::operators::LayoutKind::Mac, mesh)?;
    let v = sample_velocity(&cfg.velocity, &layout, mesh, grid)?;
    run_explicit(cfg, v, &layout, mesh, grid)
}
