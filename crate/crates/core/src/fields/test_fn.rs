//! Compactly supported test functions with closed-form derivatives.

use crate::error::{FvError, Result};
use crate::geometry::{Point, PrimalMesh, TimeGrid};

/// Closed box outside of which a test function and its derivatives vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: Point,
    pub hi: Point,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Support {
    /// Does the box meet `[lo, hi]` in the first `dim` coordinates?
    pub fn meets_box(&self, dim: usize, lo: Point, hi: Point) -> bool {
        (0..dim).all(|k| hi[k] > self.lo[k] && lo[k] < self.hi[k])
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t > self.t_lo && t < self.t_hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    /// Genuinely `C_c^∞`.
    Smooth,
    /// Smooth inside the support box, possibly discontinuous across its boundary.
    PiecewiseSmooth,
}

pub trait TestFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: Point, t: f64) -> f64;
    fn dt(&self, x: Point, t: f64) -> f64;
    fn grad(&self, x: Point, t: f64) -> Point;
    /// `None` for the zero function.
    fn support(&self) -> Option<Support>;
    /// Sup of `|φ|` over `Ω × [0, T)`.
    fn sup_norm(&self) -> f64;
    fn smoothness(&self) -> Smoothness;
}

/// Checks that the support lies strictly inside `Ω × [0, T)`.
pub fn check_support(phi: &dyn TestFunction, mesh: &PrimalMesh, grid: &TimeGrid) -> Result<()> {
    let Some(s) = phi.support() else { return Ok(()) };
    let dom = mesh.domain();
    for k in 0..mesh.dim() {
        if s.lo[k] <= dom.lo[k] || s.hi[k] >= dom.hi[k] {
            return Err(FvError::Support(format!(
                "spatial support [{}, {}] along axis {k} touches the domain boundary [{}, {}]",
                s.lo[k], s.hi[k], dom.lo[k], dom.hi[k]
            )));
        }
    }
    if s.t_hi >= grid.final_time() {
        return Err(FvError::Support(format!("time support ends at {} >= T = {}", s.t_hi, grid.final_time())));
    }
    Ok(())
}

/// Standard bump `exp(-1/(1-z²))` rescaled to `(a, b)`, with its derivative.
pub fn bump(s: f64, a: f64, b: f64) -> (f64, f64) {
    let z = (2.0 * s - a - b) / (b - a);
    if z.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - z * z;
    let v = (-1.0 / d).exp();
    (v, v * (-2.0 * z / (d * d)) * (2.0 / (b - a)))
}

/// Sup of the bump over `[from, ∞)`.
fn bump_sup_from(a: f64, b: f64, from: f64) -> f64 {
    if from <= 0.5 * (a + b) {
        bump(0.5 * (a + b), a, b).0
    } else {
        bump(from, a, b).0
    }
}

/// Tensor product of bumps in space and time.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    dim: usize,
    space: [[f64; 2]; 2],
    time: [f64; 2],
}

impl Bump {
    pub fn new(dim: usize, space: [[f64; 2]; 2], time: [f64; 2]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(FvError::Parameter(format!("dimension {dim}")));
        }
        for iv in space.iter().take(dim).chain(std::iter::once(&time)) {
            if !(iv[0] < iv[1]) || !iv[0].is_finite() || !iv[1].is_finite() {
                return Err(FvError::Parameter(format!("empty bump interval [{}, {}]", iv[0], iv[1])));
            }
        }
        Ok(Self { dim, space, time })
    }

    /// Bump on the middle half of the domain along each axis, times a time bump
    /// centred at `t = 0` with radius `0.75 T` (so `φ(·, 0) ≠ 0`).
    pub fn centred(mesh: &PrimalMesh, final_time: f64) -> Result<Self> {
        let d = mesh.domain();
        let mut space = [[-1.0, 1.0]; 2];
        for k in 0..mesh.dim() {
            let l = d.hi[k] - d.lo[k];
            space[k] = [d.lo[k] + 0.25 * l, d.hi[k] - 0.25 * l];
        }
        let r = 0.75 * final_time;
        Self::new(mesh.dim(), space, [-r, r])
    }

    fn factors(&self, x: Point, t: f64) -> ([(f64, f64); 2], (f64, f64)) {
        let mut s = [(1.0, 0.0); 2];
        for k in 0..self.dim {
            s[k] = bump(x[k], self.space[k][0], self.space[k][1]);
        }
        (s, bump(t, self.time[0], self.time[1]))
    }
}

impl TestFunction for Bump {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: Point, t: f64) -> f64 {
        let (s, tt) = self.factors(x, t);
        s[0].0 * s[1].0 * tt.0
    }

    fn dt(&self, x: Point, t: f64) -> f64 {
        let (s, tt) = self.factors(x, t);
        s[0].0 * s[1].0 * tt.1
    }

    fn grad(&self, x: Point, t: f64) -> Point {
        let (s, tt) = self.factors(x, t);
        if self.dim == 1 {
            [s[0].1 * tt.0, 0.0]
        } else {
            [s[0].1 * s[1].0 * tt.0, s[0].0 * s[1].1 * tt.0]
        }
    }

    fn support(&self) -> Option<Support> {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for k in 0..2 {
            lo[k] = self.space[k][0];
            hi[k] = self.space[k][1];
        }
        Some(Support { lo, hi, t_lo: self.time[0], t_hi: self.time[1] })
    }

    fn sup_norm(&self) -> f64 {
        let spatial = (-1.0f64).exp().powi(self.dim as i32);
        spatial * bump_sup_from(self.time[0], self.time[1], 0.0)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }
}

/// The zero test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroTest {
    pub dim: usize,
}

impl TestFunction for ZeroTest {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _: Point, _: f64) -> f64 {
        0.0
    }
    fn dt(&self, _: Point, _: f64) -> f64 {
        0.0
    }
    fn grad(&self, _: Point, _: f64) -> Point {
        [0.0, 0.0]
    }
    fn support(&self) -> Option<Support> {
        None
    }
    fn sup_norm(&self) -> f64 {
        0.0
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }
}

/// `c0 + g·x` inside an open box × time window, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePatch {
    pub dim: usize,
    pub c0: f64,
    pub gradient: Point,
    pub support: Support,
}

impl AffinePatch {
    fn inside(&self, x: Point, t: f64) -> bool {
        let s = &self.support;
        s.contains_time(t) && (0..self.dim).all(|k| x[k] > s.lo[k] && x[k] < s.hi[k])
    }
}

impl TestFunction for AffinePatch {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: Point, t: f64) -> f64 {
        if self.inside(x, t) {
            self.c0 + self.gradient[0] * x[0] + self.gradient[1] * x[1]
        } else {
            0.0
        }
    }

    fn dt(&self, _: Point, _: f64) -> f64 {
        0.0
    }

    fn grad(&self, x: Point, t: f64) -> Point {
        if self.inside(x, t) {
            self.gradient
        } else {
            [0.0, 0.0]
        }
    }

    fn support(&self) -> Option<Support> {
        Some(self.support)
    }

    fn sup_norm(&self) -> f64 {
        let s = &self.support;
        let mut m: f64 = 0.0;
        for cx in [s.lo[0], s.hi[0]] {
            for cy in [s.lo[1], s.hi[1]] {
                m = m.max((self.c0 + self.gradient[0] * cx + self.gradient[1] * cy).abs());
            }
        }
        m
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::PiecewiseSmooth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoxDomain, PrimalMesh};
    use proptest::prelude::*;

    fn default_bump() -> Bump {
        let mesh = PrimalMesh::build_cartesian(4, 4, BoxDomain::unit_square(), None).unwrap();
        Bump::centred(&mesh, 1.0).unwrap()
    }

    #[test]
    fn vanishes_outside_support() {
        let b = default_bump();
        for (x, t) in [([0.2, 0.5], 0.1), ([0.5, 0.76], 0.1), ([0.5, 0.5], 0.8), ([0.5, 0.5], -0.8)] {
            assert_eq!(b.value(x, t), 0.0);
            assert_eq!(b.dt(x, t), 0.0);
            assert_eq!(b.grad(x, t), [0.0, 0.0]);
        }
        assert!(b.value([0.5, 0.5], 0.0) > 0.0);
    }

    #[test]
    fn sup_norm_is_attained_at_centre() {
        let b = default_bump();
        assert!((b.sup_norm() - b.value([0.5, 0.5], 0.0)).abs() < 1e-16);
    }

    #[test]
    fn support_checks() {
        let mesh = PrimalMesh::build_cartesian(4, 4, BoxDomain::unit_square(), None).unwrap();
        let grid = TimeGrid::uniform(1.0, 4).unwrap();
        assert!(check_support(&default_bump(), &mesh, &grid).is_ok());
        let touching = Bump::new(2, [[0.0, 0.5], [0.2, 0.8]], [-0.5, 0.5]).unwrap();
        assert!(matches!(check_support(&touching, &mesh, &grid), Err(FvError::Support(_))));
        let late = Bump::new(2, [[0.2, 0.8], [0.2, 0.8]], [-0.5, 1.0]).unwrap();
        assert!(check_support(&late, &mesh, &grid).is_err());
        assert!(check_support(&ZeroTest { dim: 2 }, &mesh, &grid).is_ok());
    }

    proptest! {
        #[test]
        fn derivatives_match_central_differences(x in 0.26f64..0.74, y in 0.26f64..0.74, t in 0.0f64..0.7) {
            let b = default_bump();
            let e = 1e-5;
            let fd_t = (b.value([x, y], t + e) - b.value([x, y], t - e)) / (2.0 * e);
            let fd_x = (b.value([x + e, y], t) - b.value([x - e, y], t)) / (2.0 * e);
            let fd_y = (b.value([x, y + e], t) - b.value([x, y - e], t)) / (2.0 * e);
            let g = b.grad([x, y], t);
            // O(ε²) with bump third derivatives of order 10³ near the edge of the support.
            prop_assert!((fd_t - b.dt([x, y], t)).abs() < 1e-5);
            prop_assert!((fd_x - g[0]).abs() < 1e-5);
            prop_assert!((fd_y - g[1]).abs() < 1e-5);
        }
    }
}
