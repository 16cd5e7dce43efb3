//! Observed orders from a refinement series.

use crate::error::{FvError, Result};

/// Slopes of `log |y|` against `log x` with `x = δ(P) + δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub series: String,
    /// Least-squares slope over the levels with `y ≠ 0` (NaN with fewer than two).
    pub slope: f64,
    /// Slope between consecutive levels, coarse to fine; NaN when either value is 0.
    pub pair_slopes: Vec<f64>,
}

impl RateFit {
    pub const MIN_LEVELS: usize = 3;

    /// `x` decreasing with the level; a decaying `y` gives positive slopes.
    pub fn fit(series: &str, x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(FvError::Mismatch(format!("{} abscissae for {} values", x.len(), y.len())));
        }
        if x.len() < Self::MIN_LEVELS {
            return Err(FvError::Parameter(format!(
                "rate fit of '{series}' needs at least {} levels, got {}",
                Self::MIN_LEVELS,
                x.len()
            )));
        }
        let usable = |i: usize| x[i] > 0.0 && y[i].is_finite() && y[i] != 0.0;
        let pair_slopes = (1..x.len())
            .map(|i| {
                if usable(i - 1) && usable(i) {
                    (y[i].abs().ln() - y[i - 1].abs().ln()) / (x[i].ln() - x[i - 1].ln())
                } else {
                    f64::NAN
                }
            })
            .collect();
        let pts: Vec<(f64, f64)> = (0..x.len()).filter(|&i| usable(i)).map(|i| (x[i].ln(), y[i].abs().ln())).collect();
        let slope = if pts.len() < 2 {
            f64::NAN
        } else {
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        };
        Ok(Self { series: series.to_string(), slope, pair_slopes })
    }

    /// Slope of the finest pair of levels.
    pub fn finest_pair(&self) -> f64 {
        self.pair_slopes.last().copied().unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [0.4, 0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        let f = RateFit::fit("s", &x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!(f.pair_slopes.iter().all(|s| (s - 2.0).abs() < 1e-12));
    }

    #[test]
    fn too_few_levels() {
        assert!(RateFit::fit("s", &[0.2, 0.1], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn zero_values_give_nan_pairs() {
        let f = RateFit::fit("s", &[0.4, 0.2, 0.1], &[0.0, 0.0, 0.0]).unwrap();
        assert!(f.slope.is_nan() && f.finest_pair().is_nan());
    }
}
