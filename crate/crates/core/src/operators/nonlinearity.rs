//! Scalar nonlinearities `β`, `g` and their registry.

use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};

/// Clipping threshold of the entropy-like function.
pub const ENTROPY_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `s`
    Id,
    /// `s²`
    Square,
    /// `s ln s` for `s ≥ ε`, continued by its tangent line below `ε`.
    Entropy,
    /// `0`
    Zero,
}

impl Nonlinearity {
    pub const ALL: [Nonlinearity; 4] = [Self::Id, Self::Square, Self::Entropy, Self::Zero];

    pub fn name(self) -> &'static str {
        match self {
            Self::Id => "id",
            Self::Square => "square",
            Self::Entropy => "entropy",
            Self::Zero => "zero",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.name() == name)
            .ok_or_else(|| FvError::Parameter(format!("unknown nonlinearity '{name}'")))
    }

    pub fn eval(self, s: f64) -> f64 {
        match self {
            Self::Id => s,
            Self::Square => s * s,
            Self::Entropy => {
                let e = ENTROPY_EPS;
                if s >= e {
                    s * s.ln()
                } else {
                    e * e.ln() + (e.ln() + 1.0) * (s - e)
                }
            }
            Self::Zero => 0.0,
        }
    }

    /// Largest difference quotient over a uniform sampling of `[lo, hi]`.
    pub fn lipschitz(self, lo: f64, hi: f64) -> f64 {
        const SAMPLES: usize = 4096;
        if !(hi > lo) {
            return match self {
                Self::Zero => 0.0,
                _ => self.derivative_bound(lo),
            };
        }
        let h = (hi - lo) / SAMPLES as f64;
        let mut m: f64 = 0.0;
        let mut prev = self.eval(lo);
        for k in 1..=SAMPLES {
            let x = if k == SAMPLES { hi } else { lo + h * k as f64 };
            let v = self.eval(x);
            m = m.max(((v - prev) / h).abs());
            prev = v;
        }
        m
    }

    fn derivative_bound(self, s: f64) -> f64 {
        let e = 1e-6 * s.abs().max(1.0);
        ((self.eval(s + e) - self.eval(s - e)) / (2.0 * e)).abs()
    }
}

/// `(β, g)` of the staggered convection operator `∂_t β(q) + div(g(q) v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonlinearityPair {
    pub beta: Nonlinearity,
    pub g: Nonlinearity,
}

impl NonlinearityPair {
    pub fn new(beta: Nonlinearity, g: Nonlinearity) -> Self {
        Self { beta, g }
    }

    /// `β = g = id`: the mass equation.
    pub fn mass() -> Self {
        Self::new(Nonlinearity::Id, Nonlinearity::Id)
    }

    pub fn from_names(beta: &str, g: &str) -> Result<Self> {
        Ok(Self::new(Nonlinearity::from_name(beta)?, Nonlinearity::from_name(g)?))
    }

    /// `(C_β, C_g)` on `[lo, hi]`.
    pub fn moduli(&self, lo: f64, hi: f64) -> (f64, f64) {
        (self.beta.lipschitz(lo, hi), self.g.lipschitz(lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for n in Nonlinearity::ALL {
            assert_eq!(Nonlinearity::from_name(n.name()).unwrap(), n);
        }
        assert!(Nonlinearity::from_name("cube").is_err());
    }

    #[test]
    fn entropy_is_c1_at_threshold() {
        let e = ENTROPY_EPS;
        let f = Nonlinearity::Entropy;
        assert!((f.eval(e) - e * e.ln()).abs() < 1e-15);
        let left = (f.eval(e) - f.eval(e - 1e-7)) / 1e-7;
        let right = (f.eval(e + 1e-7) - f.eval(e)) / 1e-7;
        assert!((left - right).abs() < 1e-3);
        assert!(f.eval(-1.0).is_finite());
    }

    #[test]
    fn lipschitz_moduli() {
        assert!((Nonlinearity::Id.lipschitz(-1.0, 2.0) - 1.0).abs() < 1e-12);
        assert!((Nonlinearity::Square.lipschitz(-1.0, 2.0) - 4.0).abs() < 1e-2);
        assert_eq!(Nonlinearity::Zero.lipschitz(0.0, 1.0), 0.0);
        let (cb, cg) = NonlinearityPair::mass().moduli(0.0, 1.0);
        assert!((cb - 1.0).abs() < 1e-12 && (cg - 1.0).abs() < 1e-12);
    }
}
