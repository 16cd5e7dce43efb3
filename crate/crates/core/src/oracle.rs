//! Brute-force reference integrals for tests. Hard-coded 8-point
//! Gauss-Legendre tables and an independent bilinear map, composite over
//! `panels` sub-intervals per axis.
#![allow(dead_code)]

pub type Pt = [f64; 2];

const X8: [f64; 4] = [0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363];
const W8: [f64; 4] = [0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];

/// Nodes and weights on `[-1, 1]`.
pub fn gl8() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(8);
    for k in 0..4 {
        out.push((-X8[k], W8[k]));
        out.push((X8[k], W8[k]));
    }
    out
}

/// `∫_a^b f` with `panels` equal sub-intervals.
pub fn integrate_1d<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let (lo, hi) = (a + h * k as f64, a + h * (k + 1) as f64);
        for (x, w) in gl8() {
            s += 0.5 * (hi - lo) * w * f(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
        }
    }
    s
}

/// `∫` over the quadrangle `v` (counter-clockwise), through the bilinear map of
/// the unit square, split in `panels × panels` parameter sub-squares.
pub fn integrate_quad<F: Fn(Pt) -> f64>(v: [Pt; 4], panels: usize, f: F) -> f64 {
    let map = |s: f64, t: f64| -> (Pt, f64) {
        let mut x = [0.0; 2];
        let mut ds = [0.0; 2];
        let mut dt = [0.0; 2];
        for k in 0..2 {
            x[k] = (1.0 - s) * (1.0 - t) * v[0][k] + s * (1.0 - t) * v[1][k] + s * t * v[2][k] + (1.0 - s) * t * v[3][k];
            ds[k] = -(1.0 - t) * v[0][k] + (1.0 - t) * v[1][k] + t * v[2][k] - t * v[3][k];
            dt[k] = -(1.0 - s) * v[0][k] - s * v[1][k] + s * v[2][k] + (1.0 - s) * v[3][k];
        }
        (x, ds[0] * dt[1] - ds[1] * dt[0])
    };
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        for j in 0..panels {
            for (a, wa) in gl8() {
                for (b, wb) in gl8() {
                    let s = h * (i as f64 + 0.5 + 0.5 * a);
                    let t = h * (j as f64 + 0.5 + 0.5 * b);
                    let (x, jac) = map(s, t);
                    total += 0.25 * h * h * wa * wb * jac * f(x);
                }
            }
        }
    }
    total
}

/// Axis-aligned rectangle `[lo, hi]`.
pub fn integrate_rect<F: Fn(Pt) -> f64>(lo: Pt, hi: Pt, panels: usize, f: F) -> f64 {
    integrate_quad([lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]], panels, f)
}
