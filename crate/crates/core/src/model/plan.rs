use crate::{Error, Result};

/// Truncation levels `t_n = n^γ` and trimming counts `r_n = ⌈β n^{1−γ}⌉`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrimTruncPlan {
    gamma: f64,
    beta: f64,
}

impl TrimTruncPlan {
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::config(format!("gamma must lie in (0, 1/2), got {gamma}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::config(format!("beta must be positive, got {beta}")));
        }
        Ok(TrimTruncPlan { gamma, beta })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `t_n = n^γ`.
    pub fn t(&self, n: u64) -> f64 {
        truncation_level(n, self.gamma)
    }

    /// `r_n = ⌈β n^{1−γ}⌉`.
    pub fn r(&self, n: u64) -> u64 {
        (self.beta * (n as f64).powf(1.0 - self.gamma)).ceil() as u64
    }

    /// Trimming must stay intermediate along the grid: `r_n < n`, `r_n`
    /// nondecreasing and `r_n/n` shrinking from the first to the last point.
    pub fn validate_grid(&self, grid: &[u64]) -> Result<()> {
        if grid.is_empty() {
            return Err(Error::config("n_grid must not be empty"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_grid must be strictly increasing"));
        }
        for &n in grid {
            let r = self.r(n);
            if r >= n {
                return Err(Error::config(format!(
                    "r_n = {r} is not below n = {n}; raise the smallest grid point or lower beta"
                )));
            }
        }
        let first = grid[0];
        let last = *grid.last().unwrap();
        if grid.len() > 1 {
            let (r0, r1) = (self.r(first), self.r(last));
            if r1 < r0 || (r1 as f64 / last as f64) >= (r0 as f64 / first as f64) {
                return Err(Error::config("r_n/n does not decrease along the grid"));
            }
        }
        Ok(())
    }
}

/// `n^γ`, shared by every caller that needs the truncation level.
pub fn truncation_level(n: u64, gamma: f64) -> f64 {
    (n as f64).powf(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_gamma_outside_open_half_interval() {
        assert!(TrimTruncPlan::new(0.0, 1.0).is_err());
        assert!(TrimTruncPlan::new(0.5, 1.0).is_err());
        assert!(TrimTruncPlan::new(0.6, 1.0).is_err());
        assert!(TrimTruncPlan::new(0.4, 0.0).is_err());
        assert!(TrimTruncPlan::new(0.4, 1.0).is_ok());
    }

    #[test]
    fn levels_and_counts() {
        let plan = TrimTruncPlan::new(0.4, 2.0).unwrap();
        assert!((plan.t(1_000_000) - 251.188_643_150_958).abs() < 1e-9);
        assert_eq!(plan.r(1), 2);
        assert_eq!(plan.r(100_000), (2.0 * 1000.0f64).ceil() as u64);
    }

    #[test]
    fn grid_validation() {
        let plan = TrimTruncPlan::new(0.4, 3.0).unwrap();
        assert!(plan.validate_grid(&[1000, 10_000, 100_000]).is_ok());
        assert!(plan.validate_grid(&[10, 1000]).is_err());
        assert!(plan.validate_grid(&[1000, 1000]).is_err());
        assert!(plan.validate_grid(&[]).is_err());
    }
}
