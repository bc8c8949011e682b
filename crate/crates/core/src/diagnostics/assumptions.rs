use serde::{Deserialize, Serialize};

use super::series::MomentWalker;
use crate::model::{DistributionSpec, GoodSequence, TrimTruncPlan};
use crate::{Error, Result};

/// Default `c` in the series `Σ exp(−c d_n²/(n t_n²))` and `Σ exp(−c A_n)`.
pub const DEFAULT_SERIES_C: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionRow {
    pub n: u64,
    pub t: f64,
    pub r: u64,
    /// `⌈(1 + ε₀)A_n⌉`, the smallest admissible `r_n`.
    pub r_required: u64,
    pub a: f64,
    pub d: f64,
    /// `A_n t_n / d_n`.
    pub ratio1: f64,
    /// `(r_n − A_n) t_n / d_n`.
    pub ratio2: f64,
    /// `exp(−c d_n²/(n t_n²))`.
    pub summand1: f64,
    /// `exp(−c A_n)`.
    pub summand2: f64,
    /// Sums over every `m ≤ n`, not only grid points.
    pub partial_sum1: f64,
    pub partial_sum2: f64,
    /// `summand(n + 1)/summand(n)`.
    pub tail_ratio1: f64,
    pub tail_ratio2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub gamma: f64,
    pub c: f64,
    pub eps0: f64,
    pub rows: Vec<AssumptionRow>,
    pub max_ratio1: f64,
    /// Range of `ratio1 · log n` over the grid.
    pub ratio1_log_n_min: f64,
    pub ratio1_log_n_max: f64,
    pub ratio2_decreasing: bool,
}

/// Evaluate the hypotheses on `r_n`, `A_n`, `d_n` for the plan's schedule.
pub fn assumption_report(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    plan: &TrimTruncPlan,
    n_grid: &[u64],
    c: f64,
    eps0: f64,
) -> Result<AssumptionReport> {
    let r: Vec<u64> = n_grid.iter().map(|&n| plan.r(n)).collect();
    assumption_report_with_schedule(dist, seq, plan.gamma(), n_grid, &r, c, eps0)
}

/// As [`assumption_report`] with an explicit `r_n` for every grid point.
pub fn assumption_report_with_schedule(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    gamma: f64,
    n_grid: &[u64],
    r: &[u64],
    c: f64,
    eps0: f64,
) -> Result<AssumptionReport> {
    if n_grid.is_empty() || n_grid.len() != r.len() {
        return Err(Error::input("need one r_n per grid point and a non-empty grid"));
    }
    if n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("n_grid must be positive and strictly increasing"));
    }
    if !(c >= 0.0 && eps0 >= 0.0) {
        return Err(Error::input(format!("need c >= 0 and eps0 >= 0, got {c} and {eps0}")));
    }
    let mut walker = MomentWalker::new(dist, seq, gamma);
    let summands = |t: f64, a: f64, d: f64, n: u64| {
        ((-c * d * d / (n as f64 * t * t)).exp(), (-c * a).exp())
    };
    let (mut ps1, mut ps2) = (0.0, 0.0);
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut m = 1u64;
    for (&n, &r_n) in n_grid.iter().zip(r) {
        while m <= n {
            let (t, a, d) = walker.at(m)?;
            let (s1, s2) = summands(t, a, d, m);
            ps1 += s1;
            ps2 += s2;
            m += 1;
        }
        let (t, a, d) = walker.at(n)?;
        let (s1, s2) = summands(t, a, d, n);
        let (tn, an, dn) = walker.at(n + 1)?;
        let (n1, n2) = summands(tn, an, dn, n + 1);
        let r_required = ((1.0 + eps0) * a).ceil() as u64;
        if r_n < r_required {
            return Err(Error::config(format!(
                "r_n = {r_n} at n = {n} is below ceil((1 + eps0) A_n) = {r_required}"
            )));
        }
        let ratio = |x: f64| if d > 0.0 { x * t / d } else { f64::INFINITY };
        rows.push(AssumptionRow {
            n,
            t,
            r: r_n,
            r_required,
            a,
            d,
            ratio1: ratio(a),
            ratio2: ratio(r_n as f64 - a),
            summand1: s1,
            summand2: s2,
            partial_sum1: ps1,
            partial_sum2: ps2,
            tail_ratio1: if s1 > 0.0 { n1 / s1 } else { 0.0 },
            tail_ratio2: if s2 > 0.0 { n2 / s2 } else { 0.0 },
        });
    }
    let max_ratio1 = rows.iter().map(|r| r.ratio1).fold(0.0, f64::max);
    let scaled: Vec<f64> = rows
        .iter()
        .filter(|r| r.n > 1)
        .map(|r| r.ratio1 * (r.n as f64).ln())
        .collect();
    Ok(AssumptionReport {
        gamma,
        c,
        eps0,
        max_ratio1,
        ratio1_log_n_min: scaled.iter().copied().fold(f64::INFINITY, f64::min),
        ratio1_log_n_max: scaled.iter().copied().fold(0.0, f64::max),
        ratio2_decreasing: rows.windows(2).all(|w| w[1].ratio2 < w[0].ratio2),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trimstats::{choose_beta_between, exact_a, exact_d};

    fn default_report() -> AssumptionReport {
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        let grid = [1_000, 10_000, 100_000, 1_000_000];
        let beta = choose_beta_between(&id, &ints, 0.4, 1_000, 1_000_000, 0.1, 1.0).unwrap();
        let plan = TrimTruncPlan::new(0.4, beta).unwrap();
        assumption_report(&id, &ints, &plan, &grid, DEFAULT_SERIES_C, 0.1).unwrap()
    }

    #[test]
    fn default_model_meets_the_hypotheses() {
        let rep = default_report();
        let last = rep.rows.last().unwrap();
        assert!(last.ratio1 < 0.5, "ratio1 = {}", last.ratio1);
        assert!(rep.ratio2_decreasing);
        assert!(rep.ratio1_log_n_min > 0.5 && rep.ratio1_log_n_max < 5.0);
        for w in rep.rows.windows(2) {
            assert!(w[1].partial_sum1 >= w[0].partial_sum1);
            assert!(w[1].partial_sum2 >= w[0].partial_sum2);
        }
        for row in &rep.rows {
            for v in [row.ratio1, row.ratio2, row.summand1, row.summand2, row.partial_sum1] {
                assert!(v.is_finite() && v >= 0.0);
            }
        }
    }

    #[test]
    fn rows_agree_with_direct_evaluation() {
        let rep = default_report();
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        let mut ps2 = 0.0;
        for m in 1..=1000u64 {
            let t = (m as f64).powf(0.4);
            ps2 += (-DEFAULT_SERIES_C * exact_a(m, t, &id, &ints).unwrap()).exp();
        }
        let row = &rep.rows[0];
        assert!((row.partial_sum2 - ps2).abs() <= 1e-12 * ps2);
        let d = exact_d(1000, row.t, &id, &ints).unwrap();
        assert!((row.d - d).abs() <= 1e-12 * d);
    }

    #[test]
    fn zero_trimming_is_rejected() {
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        let grid = [1_000, 10_000];
        let err = assumption_report_with_schedule(&id, &ints, 0.4, &grid, &[0, 0], 0.01, 0.1);
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
