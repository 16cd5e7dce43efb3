use crate::error::{FvError, Result};

/// Time knots `0 = t_0 < t_1 < … < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    knots: Vec<f64>,
}

/// Step pattern for [`TimeGrid::build`].
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepPattern {
    #[default]
    Uniform,
    /// Steps proportional to `1, r, 1, r, …`.
    Alternating(f64),
}

impl TimeGrid {
    pub fn build(final_time: f64, steps: usize, pattern: StepPattern) -> Result<Self> {
        if steps == 0 {
            return Err(FvError::TimeGrid("at least one step is required".into()));
        }
        if !(final_time > 0.0) {
            return Err(FvError::TimeGrid(format!("final time {final_time} must be positive")));
        }
        match pattern {
            StepPattern::Uniform => {
                let mut knots: Vec<f64> = (0..=steps).map(|n| final_time * n as f64 / steps as f64).collect();
                knots[steps] = final_time;
                Ok(Self { knots })
            }
            StepPattern::Alternating(r) => {
                if !(r > 0.0) {
                    return Err(FvError::TimeGrid(format!("step ratio {r} must be positive")));
                }
                let weights: Vec<f64> = (0..steps).map(|n| if n % 2 == 0 { 1.0 } else { r }).collect();
                let total: f64 = weights.iter().sum();
                let mut knots = Vec::with_capacity(steps + 1);
                knots.push(0.0);
                let mut acc = 0.0;
                for w in &weights {
                    acc += w;
                    knots.push(final_time * acc / total);
                }
                knots[steps] = final_time;
                Self::from_knots(knots)
            }
        }
    }

    pub fn uniform(final_time: f64, steps: usize) -> Result<Self> {
        Self::build(final_time, steps, StepPattern::Uniform)
    }

    pub fn from_knots(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(FvError::TimeGrid("need at least two knots".into()));
        }
        if knots[0] != 0.0 {
            return Err(FvError::TimeGrid("first knot must be 0".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FvError::TimeGrid("knots must be strictly increasing".into()));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// N, the number of steps.
    pub fn n_steps(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn t(&self, n: usize) -> f64 {
        self.knots[n]
    }

    /// t_{n+1} − t_n.
    pub fn step(&self, n: usize) -> f64 {
        self.knots[n + 1] - self.knots[n]
    }

    pub fn final_time(&self) -> f64 {
        self.knots[self.n_steps()]
    }

    /// δt = max step.
    pub fn max_step(&self) -> f64 {
        (0..self.n_steps()).map(|n| self.step(n)).fold(0.0, f64::max)
    }

    /// θ3: largest ratio of consecutive steps, both ways; 1 for a single step.
    pub fn theta3(&self) -> f64 {
        (1..self.n_steps())
            .map(|n| {
                let (a, b) = (self.step(n - 1), self.step(n));
                (b / a).max(a / b)
            })
            .fold(1.0, f64::max)
    }

    /// Index of the step containing `t` (clamped).
    pub fn locate(&self, t: f64) -> usize {
        match self.knots.partition_point(|k| *k <= t) {
            0 => 0,
            k => (k - 1).min(self.n_steps() - 1),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_knots_and_theta3() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.knots(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.theta3(), 1.0);
        assert_eq!(g.max_step(), 0.25);
    }

    #[test]
    fn alternating_ratio() {
        let g = TimeGrid::build(1.0, 4, StepPattern::Alternating(2.0)).unwrap();
        let steps: Vec<f64> = (0..4).map(|n| g.step(n)).collect();
        // (1,2,1,2)/6
        for (s, e) in steps.iter().zip([1.0, 2.0, 1.0, 2.0]) {
            assert!((s - e / 6.0).abs() < 1e-15);
        }
        assert!((g.theta3() - 2.0).abs() < 1e-12);
        let h = TimeGrid::build(1.0, 4, StepPattern::Alternating(0.5)).unwrap();
        assert!((h.theta3() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_step_theta3_is_one() {
        assert_eq!(TimeGrid::uniform(3.0, 1).unwrap().theta3(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TimeGrid::uniform(1.0, 0).is_err());
        assert!(TimeGrid::build(1.0, 2, StepPattern::Alternating(0.0)).is_err());
        assert!(TimeGrid::from_knots(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::from_knots(vec![0.1, 0.5]).is_err());
    }

    #[test]
    fn locate_steps() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.locate(0.0), 0);
        assert_eq!(g.locate(0.3), 1);
        assert_eq!(g.locate(1.0), 3);
    }
}
