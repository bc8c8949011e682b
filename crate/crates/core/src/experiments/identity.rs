use serde::{Deserialize, Serialize};

use crate::diagnostics::{log_grid, phi_bounds_check};
use crate::model::{DistributionSpec, GoodSequence};
use crate::sampler::RngStream;
use crate::trimstats::{
    d_lower_bound, exact_d, exact_d_abel, exact_d_brute, lemma5_bound_check, residual_identity,
    trimmed_sum, ExactMoments, D_ORACLE_TOL,
};
use crate::Result;

/// Fixed seed of the identity suite; the suite is a pure function of it.
pub const IDENTITY_SEED: u64 = 0x1D3A_7C0F;
pub const IDENTITY_VECTORS: usize = 1000;
pub const IDENTITY_MAX_LEN: usize = 1000;
/// Cap on the heavy-tailed integer draws, so every partial sum of a vector
/// stays exactly representable.
pub const IDENTITY_VALUE_CAP: f64 = (1u64 << 40) as f64;
pub const PHI_GRID_POINTS: usize = 10_000;
pub const PHI_GRID_MAX: f64 = 1e7;
pub const PHI_UPPER_EPS: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
        }
        s
    }
}

fn heavy_vector(rng: &mut RngStream) -> Vec<f64> {
    let n = 1 + (rng.next_u64() % IDENTITY_MAX_LEN as u64) as usize;
    (0..n)
        .map(|_| (1.0 / rng.uniform_open()).floor().min(IDENTITY_VALUE_CAP))
        .collect()
}

fn sorted_trim_oracle(values: &[f64], r: usize) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v[r..].iter().sum()
}

/// `(r, t)` pairs exercising no trimming, full trimming, ties at `t` and
/// thresholds between and beyond the values.
fn trim_cases(values: &[f64], rng: &mut RngStream) -> Vec<(usize, f64)> {
    let n = values.len();
    let max = values.iter().copied().fold(0.0, f64::max);
    let pick = values[(rng.next_u64() % n as u64) as usize];
    let r_rand = (rng.next_u64() % (n as u64 + 1)) as usize;
    let mut cases = Vec::new();
    for r in [0, 1.min(n), r_rand, n] {
        for t in [0.5, pick, pick + 0.5, max, max + 1.0] {
            cases.push((r, t));
        }
    }
    cases
}

/// Residual identity, trimmed-sum oracle and the residual bound on random
/// heavy-tailed integer vectors.
pub fn check_trimming() -> Result<Vec<CheckResult>> {
    let mut rng = RngStream::for_domain(IDENTITY_SEED, "identity", 0);
    let (mut cases, mut identity_fail, mut oracle_fail, mut bound_checked, mut bound_fail) =
        (0usize, 0usize, 0usize, 0usize, 0usize);
    for _ in 0..IDENTITY_VECTORS {
        let v = heavy_vector(&mut rng);
        for (r, t) in trim_cases(&v, &mut rng) {
            cases += 1;
            let (lhs, rhs) = residual_identity(&v, r, t)?;
            identity_fail += usize::from(lhs != rhs);
            oracle_fail += usize::from(trimmed_sum(&v, r)? != sorted_trim_oracle(&v, r));
            if let Some(ok) = lemma5_bound_check(&v, r, t)?.holds() {
                bound_checked += 1;
                bound_fail += usize::from(!ok);
            }
        }
    }
    Ok(vec![
        CheckResult::new(
            "residual_identity",
            identity_fail == 0,
            format!("{identity_fail} mismatches in {cases} (vector, r, t) cases"),
        ),
        CheckResult::new(
            "trimmed_sum_oracle",
            oracle_fail == 0,
            format!("{oracle_fail} mismatches against a full sort in {cases} cases"),
        ),
        CheckResult::new(
            "residual_bound",
            bound_fail == 0,
            format!("{bound_fail} violations in {bound_checked} cases with r >= #{{X > t}}"),
        ),
    ])
}

/// Brute-force and Abel forms of `d_n`, the hand value `d(1, 3) = 1.5`, the
/// ordering `A_n ≤ B̄_n` and the lower bound on `d_n`.
pub fn check_moments() -> Result<Vec<CheckResult>> {
    let dists = [DistributionSpec::identity(), DistributionSpec::quadratic()];
    let seqs = [GoodSequence::integers(), GoodSequence::scaled(2)?];
    let mut worst: f64 = 0.0;
    let (mut cells, mut order_fail, mut lb_fail) = (0usize, 0usize, 0usize);
    for dist in &dists {
        for seq in &seqs {
            for n in [1u64, 10, 100] {
                for t in [3.0, 10.0, 100.0] {
                    cells += 1;
                    let b = exact_d_brute(n, t, dist, seq)?;
                    let a = exact_d_abel(n, t, dist, seq)?;
                    let scale = a.abs().max(b.abs());
                    if scale > 0.0 {
                        worst = worst.max((a - b).abs() / scale);
                    }
                    let m = ExactMoments::compute(n, t, dist, seq)?;
                    order_fail += usize::from(m.a > m.bbar);
                    lb_fail += usize::from(m.d < d_lower_bound(n, t, dist, seq)? * (1.0 - 1e-12));
                }
            }
        }
    }
    let hand = exact_d(1, 3.0, &dists[0], &seqs[0])?;
    Ok(vec![
        CheckResult::new(
            "d_oracle",
            worst <= D_ORACLE_TOL,
            format!("max relative gap {worst:.3e} over {cells} cells (tolerance {D_ORACLE_TOL:.0e})"),
        ),
        CheckResult::new(
            "d_hand_value",
            (hand - 1.5).abs() <= 1e-15,
            format!("d(1, 3) = {hand} for identity F, integer sequence"),
        ),
        CheckResult::new("a_le_bbar", order_fail == 0, format!("{order_fail} violations in {cells} cells")),
        CheckResult::new("d_lower_bound", lb_fail == 0, format!("{lb_fail} violations in {cells} cells")),
    ])
}

/// Lower bound on `φ` with zero violations and a finite `U₀` for the upper
/// bound, for `λ_j = j` and `λ_j = 2j`.
pub fn check_phi() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (name, seq) in [("phi_bounds_integers", GoodSequence::integers()), ("phi_bounds_even", GoodSequence::scaled(2)?)] {
        let grid = log_grid(seq.lambda(2), PHI_GRID_MAX, PHI_GRID_POINTS);
        let rep = phi_bounds_check(&seq, &grid, PHI_UPPER_EPS)?;
        let detail = match rep.u0 {
            Some(u0) => format!(
                "{} lower violations on {} points, min slack {:.4}; upper bound (eps {}) holds from U0 = {u0:.3e}",
                rep.lower_violations, rep.points, rep.min_lower_slack, rep.eps
            ),
            None => format!("{} lower violations; upper bound never settles", rep.lower_violations),
        };
        out.push(CheckResult::new(name, rep.lower_violations == 0 && rep.u0.is_some(), detail));
    }
    Ok(out)
}

/// The whole deterministic suite.
pub fn run_identity_suite() -> Result<IdentityReport> {
    let mut checks = check_trimming()?;
    checks.extend(check_moments()?);
    checks.extend(check_phi()?);
    Ok(IdentityReport {
        seed: IDENTITY_SEED,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_repeatable() {
        let a = run_identity_suite().unwrap();
        assert!(a.all_passed(), "{}", a.render());
        assert_eq!(a.checks.len(), 9);
        let b = run_identity_suite().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn heavy_vectors_have_exact_sums() {
        let mut rng = RngStream::new(1, 1);
        for _ in 0..50 {
            let v = heavy_vector(&mut rng);
            assert!(v.iter().all(|x| x.fract() == 0.0 && *x >= 1.0));
            assert!(v.iter().sum::<f64>() < 2f64.powi(53));
        }
    }
}
