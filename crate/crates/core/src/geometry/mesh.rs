//! Primal meshes: 1D intervals and 2D convex polygons (quadrangles in practice).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FvError, Result};

pub type Point = [f64; 2];

/// Axis-aligned box `[lo, hi]`; in 1D only the first coordinate is used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lo: Point,
    pub hi: Point,
}

impl BoxDomain {
    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    pub fn unit_square() -> Self {
        Self::new([0.0, 0.0], [1.0, 1.0])
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self::new([a, 0.0], [b, 0.0])
    }

    pub fn measure(&self, dim: usize) -> f64 {
        match dim {
            1 => self.hi[0] - self.lo[0],
            _ => (self.hi[0] - self.lo[0]) * (self.hi[1] - self.lo[1]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Vertex loop, counter-clockwise in 2D, left-to-right in 1D.
    pub vertices: Vec<usize>,
    /// F(P), ordered like the edges of the vertex loop.
    pub faces: Vec<usize>,
    pub measure: f64,
    pub diameter: f64,
    pub centroid: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// End points; both entries equal in 1D.
    pub vertices: [usize; 2],
    pub measure: f64,
    pub midpoint: Point,
    /// Unit normal pointing out of `left`.
    pub normal: Point,
    pub left: usize,
    pub right: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// Raw face record used by the mesh file format and by [`PrimalMesh::from_tables`].
#[derive(Debug, Clone, PartialEq)]
pub struct FaceRecord {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
    pub normal: Point,
}

/// Knot coordinates of a tensor-product mesh (`ys` empty in 1D).
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Lattice {
    /// Index of the cell containing `p` (clamped to the grid).
    pub fn locate(&self, p: Point) -> usize {
        let i = locate_1d(&self.xs, p[0]);
        if self.ys.is_empty() {
            i
        } else {
            let j = locate_1d(&self.ys, p[1]);
            j * (self.xs.len() - 1) + i
        }
    }
}

fn locate_1d(knots: &[f64], x: f64) -> usize {
    let n = knots.len() - 1;
    match knots.partition_point(|k| *k <= x) {
        0 => 0,
        k => (k - 1).min(n - 1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimalMesh {
    dim: usize,
    domain: BoxDomain,
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    interior: Vec<bool>,
    interior_cells: Vec<usize>,
    lattice: Option<Lattice>,
}

impl PrimalMesh {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn cell(&self, p: usize) -> &Cell {
        &self.cells[p]
    }
    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    /// P_int: cells without a boundary face.
    pub fn interior_cells(&self) -> &[usize] {
        &self.interior_cells
    }

    pub fn is_interior_cell(&self, p: usize) -> bool {
        self.interior[p]
    }

    /// Outward unit normal n_{P,ζ}.
    pub fn normal(&self, p: usize, f: usize) -> Point {
        let face = &self.faces[f];
        if face.left == p {
            face.normal
        } else {
            debug_assert_eq!(face.right, Some(p));
            [-face.normal[0], -face.normal[1]]
        }
    }

    /// +1 if `p` is the reference (left) side of `f`, -1 otherwise.
    pub fn orientation(&self, p: usize, f: usize) -> f64 {
        if self.faces[f].left == p {
            1.0
        } else {
            -1.0
        }
    }

    /// The cell across `f` from `p`, if any.
    pub fn neighbour(&self, p: usize, f: usize) -> Option<usize> {
        let face = &self.faces[f];
        if face.left == p {
            face.right
        } else {
            Some(face.left)
        }
    }

    /// δ(P) = max diam(P).
    pub fn space_step(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    /// N_E, the largest number of faces of a cell.
    pub fn max_faces_per_cell(&self) -> usize {
        self.cells.iter().map(|c| c.faces.len()).max().unwrap_or(0)
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain.measure(self.dim)
    }

    /// Axis-aligned bounding box of a cell.
    pub fn cell_bbox(&self, p: usize) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &v in &self.cells[p].vertices {
            for c in 0..2 {
                lo[c] = lo[c].min(self.vertices[v][c]);
                hi[c] = hi[c].max(self.vertices[v][c]);
            }
        }
        (lo, hi)
    }

    /// Vertex coordinates of a quadrangle.
    pub fn quad_vertices(&self, p: usize) -> Option<[Point; 4]> {
        let c = &self.cells[p];
        (self.dim == 2 && c.vertices.len() == 4).then(|| {
            [
                self.vertices[c.vertices[0]],
                self.vertices[c.vertices[1]],
                self.vertices[c.vertices[2]],
                self.vertices[c.vertices[3]],
            ]
        })
    }

    /// Face end points.
    pub fn face_points(&self, f: usize) -> (Point, Point) {
        let fc = &self.faces[f];
        (self.vertices[fc.vertices[0]], self.vertices[fc.vertices[1]])
    }

    /// Uniform 1D mesh of `n` cells on `[a, b]`.
    pub fn interval(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(FvError::Construction("cell count must be at least 1".into()));
        }
        if !(b > a) {
            return Err(FvError::Construction(format!("degenerate interval [{a}, {b}]")));
        }
        Self::interval_from_knots(uniform_knots(a, b, n))
    }

    /// 1D mesh from strictly increasing knots.
    pub fn interval_from_knots(xs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FvError::Construction("knots must be strictly increasing".into()));
        }
        let n = xs.len() - 1;
        let vertices: Vec<Point> = xs.iter().map(|&x| [x, 0.0]).collect();
        let loops: Vec<Vec<usize>> = (0..n).map(|i| vec![i, i + 1]).collect();
        let mut faces = Vec::with_capacity(n + 1);
        faces.push(FaceRecord { vertices: [0, 0], left: 0, right: None, normal: [-1.0, 0.0] });
        for i in 1..n {
            faces.push(FaceRecord { vertices: [i, i], left: i - 1, right: Some(i), normal: [1.0, 0.0] });
        }
        faces.push(FaceRecord { vertices: [n, n], left: n - 1, right: None, normal: [1.0, 0.0] });
        let domain = BoxDomain::interval(xs[0], xs[n]);
        let mut mesh = Self::from_tables(1, domain, vertices, loops, faces)?;
        mesh.lattice = Some(Lattice { xs, ys: Vec::new() });
        Ok(mesh)
    }

    /// Tensor-product mesh of `nx × ny` rectangles with optional geometric grading per axis.
    pub fn build_cartesian(nx: usize, ny: usize, domain: BoxDomain, grading: Option<[f64; 2]>) -> Result<Self> {
        let (xs, ys) = cartesian_knots(nx, ny, &domain, grading)?;
        let mut mesh = Self::tensor_quads(&xs, &ys, &domain, |_, _| [0.0, 0.0])?;
        mesh.lattice = Some(Lattice { xs, ys });
        Ok(mesh)
    }

    /// Uniform mesh whose interior vertices are moved by at most `amplitude · h` per axis.
    pub fn build_perturbed_quads(nx: usize, ny: usize, domain: BoxDomain, amplitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.25).contains(&amplitude) {
            return Err(FvError::Parameter(format!("perturbation amplitude {amplitude} outside [0, 0.25)")));
        }
        let (xs, ys) = cartesian_knots(nx, ny, &domain, None)?;
        let hx = (domain.hi[0] - domain.lo[0]) / nx as f64;
        let hy = (domain.hi[1] - domain.lo[1]) / ny as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shifts = vec![[0.0; 2]; (nx + 1) * (ny + 1)];
        for j in 1..ny {
            for i in 1..nx {
                let ux: f64 = rng.gen_range(-1.0..=1.0);
                let uy: f64 = rng.gen_range(-1.0..=1.0);
                shifts[j * (nx + 1) + i] = [amplitude * hx * ux, amplitude * hy * uy];
            }
        }
        let mut mesh = Self::tensor_quads(&xs, &ys, &domain, |i, j| shifts[j * (nx + 1) + i])?;
        for p in 0..mesh.n_cells() {
            let pts: Vec<Point> = mesh.cells[p].vertices.iter().map(|&v| mesh.vertices[v]).collect();
            if !is_convex(&pts) {
                return Err(FvError::NonConvexCell { cell: p });
            }
        }
        if amplitude == 0.0 {
            mesh.lattice = Some(Lattice { xs, ys });
        }
        Ok(mesh)
    }

    fn tensor_quads<S: Fn(usize, usize) -> Point>(xs: &[f64], ys: &[f64], domain: &BoxDomain, shift: S) -> Result<Self> {
        let nx = xs.len() - 1;
        let ny = ys.len() - 1;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for (j, &y) in ys.iter().enumerate() {
            for (i, &x) in xs.iter().enumerate() {
                let s = shift(i, j);
                vertices.push([x + s[0], y + s[1]]);
            }
        }
        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        let mut loops = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                loops.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            }
        }
        Self::from_polygons(*domain, vertices, loops)
    }

    /// 2D mesh from counter-clockwise convex polygons. Faces are deduplicated by
    /// sorted vertex pair; a face shared by two cells must be traversed in
    /// opposite directions, and unshared faces must lie on the domain boundary.
    pub fn from_polygons(domain: BoxDomain, vertices: Vec<Point>, loops: Vec<Vec<usize>>) -> Result<Self> {
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut records: Vec<FaceRecord> = Vec::new();
        for (p, lp) in loops.iter().enumerate() {
            if lp.len() < 3 {
                return Err(FvError::Construction(format!("cell {p} has fewer than 3 vertices")));
            }
            for k in 0..lp.len() {
                let a = lp[k];
                let b = lp[(k + 1) % lp.len()];
                let key = (a.min(b), a.max(b));
                match index.get(&key) {
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                        let normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                        index.insert(key, records.len());
                        records.push(FaceRecord { vertices: [a, b], left: p, right: None, normal });
                    }
                    Some(&f) => {
                        let rec = &mut records[f];
                        if rec.right.is_some() {
                            return Err(FvError::FaceMatching { face: f, reason: "shared by more than two cells".into() });
                        }
                        if rec.vertices != [b, a] {
                            return Err(FvError::FaceMatching { face: f, reason: "inconsistent orientation".into() });
                        }
                        rec.right = Some(p);
                    }
                }
            }
        }
        for (f, rec) in records.iter().enumerate() {
            if rec.right.is_none() {
                let (a, b) = (vertices[rec.vertices[0]], vertices[rec.vertices[1]]);
                if !on_same_box_side(&domain, a, b) {
                    return Err(FvError::FaceMatching {
                        face: f,
                        reason: "unmatched face inside the domain (partial or hanging adjacency)".into(),
                    });
                }
            }
        }
        Self::from_tables(2, domain, vertices, loops, records)
    }

    /// Assembles a mesh from explicit vertex, cell and face tables. Measures,
    /// centroids and diameters are recomputed; normals are taken as given.
    pub fn from_tables(
        dim: usize,
        domain: BoxDomain,
        vertices: Vec<Point>,
        loops: Vec<Vec<usize>>,
        records: Vec<FaceRecord>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(FvError::Construction(format!("unsupported dimension {dim}")));
        }
        let nv = vertices.len();
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (f, r) in records.iter().enumerate() {
            if r.vertices.iter().any(|&v| v >= nv) || r.left >= loops.len() || r.right.is_some_and(|q| q >= loops.len()) {
                return Err(FvError::Construction(format!("face {f} references a missing entity")));
            }
            let key = (r.vertices[0].min(r.vertices[1]), r.vertices[0].max(r.vertices[1]));
            if index.insert(key, f).is_some() {
                return Err(FvError::FaceMatching { face: f, reason: "duplicate face".into() });
            }
        }
        let mut cells = Vec::with_capacity(loops.len());
        for (p, lp) in loops.iter().enumerate() {
            if lp.iter().any(|&v| v >= nv) {
                return Err(FvError::Construction(format!("cell {p} references a missing vertex")));
            }
            let pts: Vec<Point> = lp.iter().map(|&v| vertices[v]).collect();
            let (faces, measure, centroid) = if dim == 1 {
                if lp.len() != 2 {
                    return Err(FvError::Construction(format!("1D cell {p} must have two vertices")));
                }
                let keys = [(lp[0], lp[0]), (lp[1], lp[1])];
                let faces = keys
                    .iter()
                    .map(|k| index.get(k).copied().ok_or_else(|| FvError::Construction(format!("cell {p}: missing end face"))))
                    .collect::<Result<Vec<_>>>()?;
                (faces, pts[1][0] - pts[0][0], [0.5 * (pts[0][0] + pts[1][0]), 0.0])
            } else {
                let mut faces = Vec::with_capacity(lp.len());
                for k in 0..lp.len() {
                    let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
                    let f = index
                        .get(&(a.min(b), a.max(b)))
                        .copied()
                        .ok_or_else(|| FvError::Construction(format!("cell {p}: edge ({a},{b}) has no face")))?;
                    faces.push(f);
                }
                let (area, c) = polygon_area_centroid(&pts);
                (faces, area, c)
            };
            if !(measure > 0.0) {
                return Err(FvError::Construction(format!("cell {p} has non-positive measure {measure}")));
            }
            for &f in &faces {
                let r = &records[f];
                if r.left != p && r.right != Some(p) {
                    return Err(FvError::FaceMatching { face: f, reason: format!("adjacency does not list cell {p}") });
                }
            }
            cells.push(Cell { vertices: lp.clone(), faces, measure, diameter: diameter(&pts), centroid });
        }
        let faces: Vec<Face> = records
            .into_iter()
            .map(|r| {
                let (a, b) = (vertices[r.vertices[0]], vertices[r.vertices[1]]);
                let measure = if dim == 1 { 1.0 } else { ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt() };
                Face {
                    vertices: r.vertices,
                    measure,
                    midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
                    normal: r.normal,
                    left: r.left,
                    right: r.right,
                }
            })
            .collect();
        if let Some((f, _)) = faces.iter().enumerate().find(|(_, f)| !(f.measure > 0.0)) {
            return Err(FvError::Construction(format!("face {f} has zero measure")));
        }
        let interior: Vec<bool> = cells.iter().map(|c| c.faces.iter().all(|&f| !faces[f].is_boundary())).collect();
        let interior_cells = (0..cells.len()).filter(|&p| interior[p]).collect();
        Ok(Self { dim, domain, vertices, cells, faces, interior, interior_cells, lattice: None })
    }

    /// Checks the geometric identities every valid mesh satisfies and reports
    /// the first violated one with the offending entity.
    pub fn check_identities(&self) -> Result<()> {
        for (f, face) in self.faces.iter().enumerate() {
            let n = face.normal;
            let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
            if (len - 1.0).abs() > 1e-12 {
                return Err(identity("unit normal", format!("face {f}"), format!("|n| = {len}")));
            }
            let c = self.cells[face.left].centroid;
            let out = n[0] * (face.midpoint[0] - c[0]) + n[1] * (face.midpoint[1] - c[1]);
            if !(out > 0.0) {
                return Err(identity("outward normal", format!("face {f}"), "normal points into its left cell".into()));
            }
            if let Some(q) = face.right {
                let c = self.cells[q].centroid;
                let out = n[0] * (face.midpoint[0] - c[0]) + n[1] * (face.midpoint[1] - c[1]);
                if !(out < 0.0) {
                    return Err(identity("normal antisymmetry", format!("face {f}"), "n_P and n_Q do not oppose".into()));
                }
            }
        }
        for (p, cell) in self.cells.iter().enumerate() {
            let (s, scale) = self.closure_defect(p);
            if s > 1e-12 * scale {
                return Err(identity("closed polygon", format!("cell {p}"), format!("|sum |f| n| = {s:e}")));
            }
            if !(cell.measure > 0.0) {
                return Err(identity("positive measure", format!("cell {p}"), format!("{}", cell.measure)));
            }
        }
        let total: f64 = self.cells.iter().map(|c| c.measure).sum();
        let omega = self.domain_measure();
        if (total - omega).abs() > 1e-12 * omega {
            return Err(identity("measure partition", "mesh".into(), format!("sum |P| = {total}, |Omega| = {omega}")));
        }
        Ok(())
    }

    /// (‖Σ_{ζ∈F(P)} |ζ| n_{P,ζ}‖, Σ |ζ|) for a cell.
    pub fn closure_defect(&self, p: usize) -> (f64, f64) {
        let mut s = [0.0; 2];
        let mut scale = 0.0;
        for &f in &self.cells[p].faces {
            let n = self.normal(p, f);
            let m = self.faces[f].measure;
            s[0] += m * n[0];
            s[1] += m * n[1];
            scale += m;
        }
        ((s[0] * s[0] + s[1] * s[1]).sqrt(), scale)
    }

    /// Whether every cell is an axis-aligned rectangle.
    pub fn is_rectangular(&self) -> std::result::Result<(), usize> {
        if self.dim != 2 {
            return Err(0);
        }
        for (p, c) in self.cells.iter().enumerate() {
            if c.faces.len() != 4 {
                return Err(p);
            }
            let (mut nx, mut ny) = (0, 0);
            for &f in &c.faces {
                let n = self.faces[f].normal;
                if n[1] == 0.0 && n[0].abs() == 1.0 {
                    nx += 1;
                } else if n[0] == 0.0 && n[1].abs() == 1.0 {
                    ny += 1;
                } else {
                    return Err(p);
                }
            }
            if nx != 2 || ny != 2 {
                return Err(p);
            }
        }
        Ok(())
    }
}

fn identity(invariant: &'static str, entity: String, detail: String) -> FvError {
    FvError::Identity { invariant, entity, detail }
}

fn uniform_knots(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / n as f64;
    let mut xs: Vec<f64> = (0..=n).map(|i| a + i as f64 * h).collect();
    xs[n] = b;
    xs
}

fn graded_knots(a: f64, b: f64, n: usize, ratio: f64) -> Vec<f64> {
    if ratio == 1.0 {
        return uniform_knots(a, b, n);
    }
    let w0 = (b - a) * (ratio - 1.0) / (ratio.powi(n as i32) - 1.0);
    let mut xs = Vec::with_capacity(n + 1);
    xs.push(a);
    let mut w = w0;
    for _ in 0..n {
        let next = xs.last().unwrap() + w;
        xs.push(next);
        w *= ratio;
    }
    xs[n] = b;
    xs
}

fn cartesian_knots(nx: usize, ny: usize, domain: &BoxDomain, grading: Option<[f64; 2]>) -> Result<(Vec<f64>, Vec<f64>)> {
    if nx == 0 || ny == 0 {
        return Err(FvError::Construction(format!("cell counts must be positive (nx={nx}, ny={ny})")));
    }
    if !(domain.hi[0] > domain.lo[0] && domain.hi[1] > domain.lo[1]) {
        return Err(FvError::Construction("degenerate box".into()));
    }
    let [rx, ry] = grading.unwrap_or([1.0, 1.0]);
    if !(rx > 0.0 && ry > 0.0) {
        return Err(FvError::Construction(format!("grading ratios must be positive ({rx}, {ry})")));
    }
    Ok((
        graded_knots(domain.lo[0], domain.hi[0], nx, rx),
        graded_knots(domain.lo[1], domain.hi[1], ny, ry),
    ))
}

fn on_same_box_side(d: &BoxDomain, a: Point, b: Point) -> bool {
    let tol = 1e-12 * ((d.hi[0] - d.lo[0]).abs() + (d.hi[1] - d.lo[1]).abs());
    (0..2).any(|c| {
        ((a[c] - d.lo[c]).abs() <= tol && (b[c] - d.lo[c]).abs() <= tol)
            || ((a[c] - d.hi[c]).abs() <= tol && (b[c] - d.hi[c]).abs() <= tol)
    })
}

/// Shoelace area and centroid of a simple polygon.
pub fn polygon_area_centroid(pts: &[Point]) -> (f64, Point) {
    let n = pts.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for k in 0..n {
        let p = pts[k];
        let q = pts[(k + 1) % n];
        let cross = p[0] * q[1] - q[0] * p[1];
        a2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * a2;
    (area, [cx / (3.0 * a2), cy / (3.0 * a2)])
}

/// Largest vertex-to-vertex distance (the diameter of a convex polygon).
pub fn diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt());
        }
    }
    d
}

/// Strict convexity of a counter-clockwise polygon.
pub fn is_convex(pts: &[Point]) -> bool {
    let n = pts.len();
    (0..n).all(|k| {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        let c = pts[(k + 2) % n];
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0
    })
}
