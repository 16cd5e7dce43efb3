//! Gauss-Legendre rules on [-1, 1], 1D intervals and bilinear quadrangles.

use crate::error::{FvError, Result};
use crate::geometry::{Point, PrimalMesh};

/// Gauss-Legendre rule with `order` points on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Default per-axis order for cell and face means.
pub const DEFAULT_ORDER: usize = 4;
/// Order used by reference ("oracle") integrals.
pub const ORACLE_ORDER: usize = 8;

impl GaussLegendre {
    /// Nodes by Newton iteration on P_n from the Chebyshev guess.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature points `(x, weight)` on a quadrangle through the bilinear map
/// of its four vertices (counter-clockwise). Weights include the Jacobian.
pub fn quad_points(rule: &GaussLegendre, v: &[Point; 4]) -> Vec<(Point, f64)> {
    let mut out = Vec::with_capacity(rule.order() * rule.order());
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        for (eta, wj) in rule.nodes.iter().zip(&rule.weights) {
            let n = [
                0.25 * (1.0 - xi) * (1.0 - eta),
                0.25 * (1.0 + xi) * (1.0 - eta),
                0.25 * (1.0 + xi) * (1.0 + eta),
                0.25 * (1.0 - xi) * (1.0 + eta),
            ];
            let dxi = [-0.25 * (1.0 - eta), 0.25 * (1.0 - eta), 0.25 * (1.0 + eta), -0.25 * (1.0 + eta)];
            let deta = [-0.25 * (1.0 - xi), -0.25 * (1.0 + xi), 0.25 * (1.0 + xi), 0.25 * (1.0 - xi)];
            let mut p = [0.0; 2];
            let mut j = [[0.0; 2]; 2];
            for k in 0..4 {
                for c in 0..2 {
                    p[c] += n[k] * v[k][c];
                    j[c][0] += dxi[k] * v[k][c];
                    j[c][1] += deta[k] * v[k][c];
                }
            }
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            out.push((p, wi * wj * det));
        }
    }
    out
}

/// Quadrature points on the segment `[a, b]` in the plane. Weights sum to the length.
pub fn segment_points(rule: &GaussLegendre, a: Point, b: Point) -> Vec<(Point, f64)> {
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(s, w)| {
            let t = 0.5 * (1.0 + s);
            ([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], 0.5 * w * len)
        })
        .collect()
}

/// Tolerance on the mean used by [`AdaptiveMean`].
pub const ADAPTIVE_TOL: f64 = 1e-13;

/// Means over cells and faces by composite Gauss-Legendre: a piece is accepted
/// when orders `p` and `p + 2` agree to `tol` (relative to its measure), and
/// split in two (segments) or four (quadrangles, in parameter space)
/// otherwise. The value kept is the order `p + 2` one.
#[derive(Debug, Clone)]
pub struct AdaptiveMean {
    lo: GaussLegendre,
    hi: GaussLegendre,
    tol: f64,
}

/// A mean with the sum of the accepted `|I_p − I_{p+2}|`, divided by the measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub error: f64,
}

const MAX_DEPTH_QUAD: usize = 7;
const MAX_DEPTH_SEGMENT: usize = 24;

impl AdaptiveMean {
    pub fn new(order: usize) -> Self {
        Self { lo: GaussLegendre::new(order), hi: GaussLegendre::new(order + 2), tol: ADAPTIVE_TOL }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn order(&self) -> usize {
        self.lo.order()
    }

    /// Mean of `f` over cell `p` (an interval in 1D, a quadrangle in 2D).
    pub fn cell_mean<F: Fn(Point) -> f64>(&self, mesh: &PrimalMesh, p: usize, f: F) -> Result<MeanEstimate> {
        let c = mesh.cell(p);
        if mesh.dim() == 1 {
            let v = mesh.vertices();
            return Ok(self.segment_mean(v[c.vertices[0]], v[c.vertices[1]], f));
        }
        let v = mesh.quad_vertices(p).ok_or(FvError::NotQuadrangle { cell: p, faces: c.faces.len() })?;
        Ok(self.quad_mean(&v, f))
    }

    /// Mean of `f` over face `z` (the point value in 1D).
    pub fn face_mean<F: Fn(Point) -> f64>(&self, mesh: &PrimalMesh, z: usize, f: F) -> MeanEstimate {
        if mesh.dim() == 1 {
            return MeanEstimate { mean: f(mesh.face(z).midpoint), error: 0.0 };
        }
        let (a, b) = mesh.face_points(z);
        self.segment_mean(a, b, f)
    }

    /// Mean over the segment `[a, b]` of the plane.
    pub fn segment_mean<F: Fn(Point) -> f64>(&self, a: Point, b: Point, f: F) -> MeanEstimate {
        let f0 = f([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        let g = |x: Point| f(x) - f0;
        let (i, w, e) = self.segment_rec(a, b, &g, 0);
        MeanEstimate { mean: f0 + i / w, error: e / w }
    }

    /// Mean over the quadrangle `v` (counter-clockwise).
    pub fn quad_mean<F: Fn(Point) -> f64>(&self, v: &[Point; 4], f: F) -> MeanEstimate {
        let f0 = f(v[0]);
        let g = |x: Point| f(x) - f0;
        let (i, w, e) = self.quad_rec(v, &g, 0);
        MeanEstimate { mean: f0 + i / w, error: e / w }
    }

    fn segment_rec(&self, a: Point, b: Point, f: &dyn Fn(Point) -> f64, depth: usize) -> (f64, f64, f64) {
        let sum = |rule: &GaussLegendre| {
            let mut i = 0.0;
            let mut w = 0.0;
            for (x, wx) in segment_points(rule, a, b) {
                i += wx * f(x);
                w += wx;
            }
            (i, w)
        };
        let (il, _) = sum(&self.lo);
        let (ih, wh) = sum(&self.hi);
        let diff = (ih - il).abs();
        if diff <= self.tol * wh || depth >= MAX_DEPTH_SEGMENT {
            return (ih, wh, diff);
        }
        let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let l = self.segment_rec(a, m, f, depth + 1);
        let r = self.segment_rec(m, b, f, depth + 1);
        (l.0 + r.0, l.1 + r.1, l.2 + r.2)
    }

    fn quad_rec(&self, v: &[Point; 4], f: &dyn Fn(Point) -> f64, depth: usize) -> (f64, f64, f64) {
        let sum = |rule: &GaussLegendre| {
            let mut i = 0.0;
            let mut w = 0.0;
            for (x, wx) in quad_points(rule, v) {
                i += wx * f(x);
                w += wx;
            }
            (i, w)
        };
        let (il, _) = sum(&self.lo);
        let (ih, wh) = sum(&self.hi);
        let diff = (ih - il).abs();
        if diff <= self.tol * wh || depth >= MAX_DEPTH_QUAD {
            return (ih, wh, diff);
        }
        let mid = |a: Point, b: Point| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let (m01, m12, m23, m30) = (mid(v[0], v[1]), mid(v[1], v[2]), mid(v[2], v[3]), mid(v[3], v[0]));
        let c = mid(m01, m23);
        let mut acc = (0.0, 0.0, 0.0);
        for sub in [[v[0], m01, c, m30], [m01, v[1], m12, c], [c, m12, v[2], m23], [m30, c, m23, v[3]]] {
            let r = self.quad_rec(&sub, f, depth + 1);
            acc = (acc.0 + r.0, acc.1 + r.1, acc.2 + r.2);
        }
        acc
    }
}

/// Precomputed cell and face quadrature points of a mesh.
#[derive(Debug, Clone)]
pub struct MeshQuadrature {
    order: usize,
    cells: Vec<Vec<(Point, f64)>>,
    faces: Vec<Vec<(Point, f64)>>,
}

impl MeshQuadrature {
    /// Tensor Gauss-Legendre through the bilinear map on quadrangles, plain
    /// Gauss-Legendre on 1D cells; faces use the 1D rule (a point in 1D).
    pub fn new(mesh: &PrimalMesh, order: usize) -> Result<Self> {
        let rule = GaussLegendre::new(order);
        let cells = (0..mesh.n_cells())
            .map(|p| cell_points(mesh, p, &rule))
            .collect::<Result<Vec<_>>>()?;
        let faces = (0..mesh.n_faces())
            .map(|f| {
                if mesh.dim() == 1 {
                    vec![(mesh.face(f).midpoint, 1.0)]
                } else {
                    let (a, b) = mesh.face_points(f);
                    segment_points(&rule, a, b)
                }
            })
            .collect();
        Ok(Self { order, cells, faces })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cell(&self, p: usize) -> &[(Point, f64)] {
        &self.cells[p]
    }

    pub fn face(&self, f: usize) -> &[(Point, f64)] {
        &self.faces[f]
    }

    /// ∫_P f.
    pub fn integrate_cell<F: Fn(Point) -> f64>(&self, p: usize, f: F) -> f64 {
        self.cells[p].iter().map(|(x, w)| w * f(*x)).sum()
    }

    /// ∫_ζ f (the point value in 1D).
    pub fn integrate_face<F: Fn(Point) -> f64>(&self, f: usize, g: F) -> f64 {
        self.faces[f].iter().map(|(x, w)| w * g(*x)).sum()
    }
}

fn cell_points(mesh: &PrimalMesh, p: usize, rule: &GaussLegendre) -> Result<Vec<(Point, f64)>> {
    if mesh.dim() == 1 {
        let c = mesh.cell(p);
        let (a, b) = (mesh.vertices()[c.vertices[0]][0], mesh.vertices()[c.vertices[1]][0]);
        return Ok(rule.mapped(a, b).map(|(x, w)| ([x, 0.0], w)).collect());
    }
    match mesh.quad_vertices(p) {
        Some(v) => Ok(quad_points(rule, &v)),
        None => Err(FvError::NotQuadrangle { cell: p, faces: mesh.cell(p).faces.len() }),
    }
}
