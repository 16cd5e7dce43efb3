//! Face values, staggered and colocated fluxes.

use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::fields::{CellScalarField, FaceScalarField, FaceVectorField};
use crate::geometry::{DualMeshMAC, DualMeshRT, Point, PrimalMesh};
use crate::operators::NonlinearityPair;

/// Convex combination used for `q_ζ^n` on an interior face `ζ = P|Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FaceScheme {
    /// `λ q_P + (1 − λ) q_Q`.
    Centered { lambda: f64 },
    /// Upstream value with respect to `v·n_{P,ζ}`; centred (`λ = 1/2`) on ties.
    Upwind,
}

impl FaceScheme {
    pub fn centered() -> Self {
        Self::Centered { lambda: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Centered { lambda } if !(0.0..=1.0).contains(lambda) => {
                Err(FvError::Parameter(format!("centred weight {lambda} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }
}

/// `λ a + (1 − λ) b`, written so that `a == b` returns `a` exactly.
fn blend(a: f64, b: f64, lambda: f64) -> f64 {
    b + lambda * (a - b)
}

/// `q_ζ` from the two neighbour values; `signal` is `v_ζ·n_{P,ζ}`.
pub fn face_value_from(q_p: f64, q_q: f64, signal: f64, scheme: FaceScheme) -> f64 {
    match scheme {
        FaceScheme::Centered { lambda } => blend(q_p, q_q, lambda),
        FaceScheme::Upwind if signal > 0.0 => q_p,
        FaceScheme::Upwind if signal < 0.0 => q_q,
        FaceScheme::Upwind => blend(q_p, q_q, 0.5),
    }
}

/// `q_ζ^n` on an interior face, `P` being the left cell of the face.
pub fn face_value(
    q: &CellScalarField,
    mesh: &PrimalMesh,
    face: usize,
    n: usize,
    signal: f64,
    scheme: FaceScheme,
) -> Result<f64> {
    let f = mesh.face(face);
    let r = f.right.ok_or(FvError::BoundaryFace { face })?;
    Ok(face_value_from(q.get(f.left, n), q.get(r, n), signal, scheme))
}

/// How fluxes through `∂Ω` are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryPolicy {
    ZeroFlux,
    /// Upwind with the exterior state `q = 0`.
    #[default]
    UpwindExteriorZero,
    /// Wraps the two end faces of a 1D mesh onto each other.
    Periodic,
}

/// Staggering of the velocity unknowns.
#[derive(Debug, Clone)]
pub enum Layout {
    /// Cell unknowns only, with a constant transport velocity.
    Colocated1d,
    Rt(DualMeshRT),
    Mac(DualMeshMAC),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutKind {
    Colocated1d,
    Rt,
    Mac,
}

impl Layout {
    pub fn build(kind: LayoutKind, mesh: &PrimalMesh) -> Result<Self> {
        match kind {
            LayoutKind::Colocated1d if mesh.dim() == 1 => Ok(Self::Colocated1d),
            LayoutKind::Colocated1d => Err(FvError::Parameter("colocated layout needs a 1D mesh".into())),
            LayoutKind::Rt => Ok(Self::Rt(DualMeshRT::build(mesh)?)),
            LayoutKind::Mac => Ok(Self::Mac(DualMeshMAC::build(mesh)?)),
        }
    }

    pub fn kind(&self) -> LayoutKind {
        match self {
            Self::Colocated1d => LayoutKind::Colocated1d,
            Self::Rt(_) => LayoutKind::Rt,
            Self::Mac(_) => LayoutKind::Mac,
        }
    }
}

/// Velocity unknowns matching a [`Layout`].
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    /// Constant transport velocity (colocated layout).
    Speed(Point),
    Rt(FaceVectorField),
    Mac(FaceScalarField),
}

impl Velocity {
    /// Checks the velocity against the layout and the number of levels used.
    pub fn check(&self, layout: &Layout, mesh: &PrimalMesh, levels: usize) -> Result<()> {
        let ok = match (layout, self) {
            (Layout::Colocated1d, Self::Speed(_)) => true,
            (Layout::Rt(_), Self::Rt(v)) => v.n_faces() == mesh.n_faces() && v.n_levels() >= levels,
            (Layout::Mac(_), Self::Mac(v)) => v.n_faces() == mesh.n_faces() && v.n_levels() >= levels,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(FvError::Mismatch("velocity does not match the layout or mesh".into()))
        }
    }

    /// Full vector attached to face `z` at level `n` (`v_ζ e^(i)` for MAC).
    pub fn vector(&self, layout: &Layout, z: usize, n: usize) -> Point {
        match (self, layout) {
            (Self::Speed(s), _) => *s,
            (Self::Rt(v), _) => v.get(z, n),
            (Self::Mac(v), Layout::Mac(d)) => {
                let e = d.direction(z).unit();
                let s = v.get(z, n);
                [s * e[0], s * e[1]]
            }
            (Self::Mac(_), _) => unreachable!("checked by Velocity::check"),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Speed(s) => (s[0] * s[0] + s[1] * s[1]).sqrt(),
            Self::Rt(v) => v.sup_norm(),
            Self::Mac(v) => v.sup_norm(),
        }
    }
}

/// `F_ζ^n` per face and level `n < N`. Boundary faces are flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxFamily {
    n_faces: usize,
    values: Vec<Option<Point>>,
    boundary: Vec<bool>,
}

impl FluxFamily {
    pub fn from_fn<F: Fn(usize, usize) -> Option<Point>>(mesh: &PrimalMesh, n_steps: usize, f: F) -> Self {
        let n_faces = mesh.n_faces();
        let mut values = Vec::with_capacity(n_faces * n_steps);
        for n in 0..n_steps {
            for z in 0..n_faces {
                values.push(f(z, n));
            }
        }
        let boundary = mesh.faces().iter().map(|f| f.is_boundary()).collect();
        Self { n_faces, values, boundary }
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn n_steps(&self) -> usize {
        if self.n_faces == 0 {
            0
        } else {
            self.values.len() / self.n_faces
        }
    }

    pub fn get(&self, z: usize, n: usize) -> Result<Point> {
        self.values[n * self.n_faces + z].ok_or(FvError::MissingFlux { face: z })
    }

    pub fn is_boundary(&self, z: usize) -> bool {
        self.boundary[z]
    }
}

fn scale(s: f64, v: Point) -> Point {
    [s * v[0], s * v[1]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[allow(clippy::too_many_arguments)]
fn boundary_flux(
    qn: &[f64],
    mesh: &PrimalMesh,
    z: usize,
    vz: Point,
    pair: &NonlinearityPair,
    policy: BoundaryPolicy,
    scheme: FaceScheme,
) -> Result<Point> {
    let f = mesh.face(z);
    match policy {
        BoundaryPolicy::ZeroFlux => Ok([0.0, 0.0]),
        BoundaryPolicy::UpwindExteriorZero => {
            let qz = face_value_from(qn[f.left], 0.0, dot(vz, f.normal), FaceScheme::Upwind);
            Ok(scale(pair.g.eval(qz), vz))
        }
        BoundaryPolicy::Periodic => {
            if mesh.dim() != 1 {
                return Err(FvError::Parameter("periodic boundary policy is 1D only".into()));
            }
            let last = mesh.n_cells() - 1;
            let qz = face_value_from(qn[last], qn[0], vz[0], scheme);
            Ok(scale(pair.g.eval(qz), vz))
        }
    }
}

/// Fluxes of one level: `qn` holds `q^n` per cell, the velocity is read at level `n`.
#[allow(clippy::too_many_arguments)]
pub fn flux_at_level(
    qn: &[f64],
    v: &Velocity,
    layout: &Layout,
    mesh: &PrimalMesh,
    n: usize,
    pair: &NonlinearityPair,
    scheme: FaceScheme,
    policy: BoundaryPolicy,
) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(mesh.n_faces());
    for (z, f) in mesh.faces().iter().enumerate() {
        let vz = v.vector(layout, z, n);
        let flux = match f.right {
            Some(r) => {
                let qz = face_value_from(qn[f.left], qn[r], dot(vz, f.normal), scheme);
                scale(pair.g.eval(qz), vz)
            }
            None => boundary_flux(qn, mesh, z, vz, pair, policy, scheme)?,
        };
        out.push(flux);
    }
    Ok(out)
}

/// `F_ζ^n = g(q_ζ^n) v_ζ^n` on every face and level `n < N`, `N` being the
/// last level of `q`.
#[allow(clippy::too_many_arguments)]
pub fn flux_staggered(
    q: &CellScalarField,
    v: &Velocity,
    layout: &Layout,
    mesh: &PrimalMesh,
    pair: &NonlinearityPair,
    scheme: FaceScheme,
    policy: BoundaryPolicy,
) -> Result<FluxFamily> {
    scheme.validate()?;
    if q.n_cells() != mesh.n_cells() || q.n_levels() < 2 {
        return Err(FvError::Mismatch("scalar field does not match the mesh".into()));
    }
    let steps = q.n_levels() - 1;
    v.check(layout, mesh, steps)?;
    let mut values = Vec::with_capacity(steps * mesh.n_faces());
    for n in 0..steps {
        values.extend(flux_at_level(q.level(n), v, layout, mesh, n, pair, scheme, policy)?.into_iter().map(Some));
    }
    let boundary = mesh.faces().iter().map(|f| f.is_boundary()).collect();
    Ok(FluxFamily { n_faces: mesh.n_faces(), values, boundary })
}

/// Upwind flux `F = g(u_{P⁻}) s` for `∂_t β(u) + ∂_x (g(u) s)` on a 1D mesh.
pub fn flux_colocated_upwind_1d(
    u: &CellScalarField,
    speed: f64,
    mesh: &PrimalMesh,
    pair: &NonlinearityPair,
    policy: BoundaryPolicy,
) -> Result<FluxFamily> {
    if mesh.dim() != 1 {
        return Err(FvError::Parameter("colocated upwind flux needs a 1D mesh".into()));
    }
    flux_staggered(u, &Velocity::Speed([speed, 0.0]), &Layout::Colocated1d, mesh, pair, FaceScheme::Upwind, policy)
}

/// Values of `f(U)(x, t)·n_{P,ζ}` on the pieces of `P × (t_n, t_{n+1})` where
/// the integrand is constant, as `(measure, value)` pairs. RT: the four half
/// diamonds; MAC: the two halves across the direction of `ζ`; colocated: `P`.
#[allow(clippy::too_many_arguments)]
pub fn local_flux_pieces(
    q: &CellScalarField,
    v: &Velocity,
    layout: &Layout,
    mesh: &PrimalMesh,
    pair: &NonlinearityPair,
    p: usize,
    z: usize,
    n: usize,
) -> ([(f64, f64); 4], usize) {
    let gp = pair.g.eval(q.get(p, n));
    let nz = mesh.normal(p, z);
    let mut out = [(0.0, 0.0); 4];
    match layout {
        Layout::Colocated1d => {
            out[0] = (mesh.cell(p).measure, dot(scale(gp, v.vector(layout, z, n)), nz));
            (out, 1)
        }
        Layout::Rt(d) => {
            for (k, &zp) in mesh.cell(p).faces.iter().enumerate() {
                out[k] = (d.half_measure(p), dot(scale(gp, v.vector(layout, zp, n)), nz));
            }
            (out, 4)
        }
        Layout::Mac(d) => {
            let zo = d.opposite(p, z);
            out[0] = (d.half_measure(p), dot(scale(gp, v.vector(layout, z, n)), nz));
            out[1] = (d.half_measure(p), dot(scale(gp, v.vector(layout, zo, n)), nz));
            (out, 2)
        }
    }
}

/// Mean of `f(U)` over `P` at level `n`.
#[allow(clippy::too_many_arguments)]
pub fn mean_flux(
    q: &CellScalarField,
    v: &Velocity,
    layout: &Layout,
    mesh: &PrimalMesh,
    pair: &NonlinearityPair,
    p: usize,
    n: usize,
) -> Point {
    let gp = pair.g.eval(q.get(p, n));
    match layout {
        Layout::Colocated1d => scale(gp, v.vector(layout, 0, n)),
        Layout::Rt(_) => {
            let faces = &mesh.cell(p).faces;
            let mut s = [0.0; 2];
            for &z in faces {
                let vz = v.vector(layout, z, n);
                s[0] += vz[0];
                s[1] += vz[1];
            }
            scale(gp / faces.len() as f64, s)
        }
        Layout::Mac(d) => {
            let mut s = [0.0; 2];
            for dir in [crate::geometry::Direction::X, crate::geometry::Direction::Y] {
                let (a, b) = d.pair(p, dir);
                let (va, vb) = (v.vector(layout, a, n), v.vector(layout, b, n));
                s[dir.index()] = 0.5 * (va[dir.index()] + vb[dir.index()]);
            }
            scale(gp, s)
        }
    }
}

/// `max |F_ζ^n·n_{P,ζ} − f(U)·n_{P,ζ}|` over the pieces of `P` attached to `ζ`.
#[allow(clippy::too_many_arguments)]
pub fn flux_defect(
    flux: &FluxFamily,
    q: &CellScalarField,
    v: &Velocity,
    layout: &Layout,
    mesh: &PrimalMesh,
    pair: &NonlinearityPair,
    p: usize,
    z: usize,
    n: usize,
) -> Result<f64> {
    let fz = dot(flux.get(z, n)?, mesh.normal(p, z));
    let (pieces, count) = local_flux_pieces(q, v, layout, mesh, pair, p, z, n);
    Ok(pieces[..count].iter().map(|&(_, val)| (fz - val).abs()).fold(0.0, f64::max))
}
