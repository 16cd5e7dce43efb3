//! Closed-form scalar and vector fields used as manufactured data and initial data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fields::bump;
use crate::geometry::{BoxDomain, Point};

/// Scalar field `q̄(x, t)`. In 1D the second coordinate is ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarProfile {
    Constant {
        value: f64,
    },
    /// `offset + amplitude sin(πx₁) sin(πx₂) cos t`.
    SinSinCos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `c0 + gradient·x + rate t`.
    Affine {
        c0: f64,
        gradient: Point,
        #[serde(default)]
        rate: f64,
    },
    /// `offset + height Π_k bump(x_k; centre_k ± radius)`, constant in time.
    Bump {
        centre: Point,
        radius: f64,
        #[serde(default = "one")]
        height: f64,
        #[serde(default)]
        offset: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ScalarProfile {
    pub fn eval(&self, dim: usize, x: Point, t: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::SinSinCos { amplitude, offset } => {
                let s = if dim == 1 { (PI * x[0]).sin() } else { (PI * x[0]).sin() * (PI * x[1]).sin() };
                offset + amplitude * s * t.cos()
            }
            Self::Affine { c0, gradient, rate } => {
                let mut v = c0 + gradient[0] * x[0] + rate * t;
                if dim == 2 {
                    v += gradient[1] * x[1];
                }
                v
            }
            Self::Bump { centre, radius, height, offset } => {
                let mut v = height;
                for k in 0..dim {
                    v *= bump(x[k], centre[k] - radius, centre[k] + radius).0;
                }
                offset + v
            }
        }
    }

    /// Solution of `∂_t q + s·∇q = 0` with this profile as initial data and
    /// `q = exterior` wherever the characteristic foot leaves `domain`.
    pub fn transported(&self, dim: usize, domain: &BoxDomain, speed: Point, exterior: f64, x: Point, t: f64) -> f64 {
        let foot = [x[0] - speed[0] * t, x[1] - speed[1] * t];
        let inside = (0..dim).all(|k| foot[k] >= domain.lo[k] && foot[k] <= domain.hi[k]);
        if inside {
            self.eval(dim, foot, 0.0)
        } else {
            exterior
        }
    }
}

/// Vector field `v̄(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorProfile {
    Constant { value: Point },
    /// Solid rotation `ω (−(x₂ − c₂), x₁ − c₁)`.
    Rotation { omega: f64, centre: Point },
    /// `value + gradient · x`, row `i` of `gradient` being `∇v̄_i`.
    Affine { value: Point, gradient: [Point; 2] },
}

impl VectorProfile {
    pub fn eval(&self, x: Point, _t: f64) -> Point {
        match *self {
            Self::Constant { value } => value,
            Self::Rotation { omega, centre } => [-omega * (x[1] - centre[1]), omega * (x[0] - centre[0])],
            Self::Affine { value, gradient: g } => {
                [value[0] + g[0][0] * x[0] + g[0][1] * x[1], value[1] + g[1][0] * x[0] + g[1][1] * x[1]]
            }
        }
    }

    pub fn constant_value(&self) -> Option<Point> {
        match *self {
            Self::Constant { value } => Some(value),
            Self::Rotation { .. } => None,
            Self::Affine { value, gradient } => (gradient == [[0.0; 2]; 2]).then_some(value),
        }
    }
}
