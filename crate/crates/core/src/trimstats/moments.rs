use serde::{Deserialize, Serialize};

use super::sum::CompensatedSum;
use crate::model::{digit_mass, digit_tail, truncation_level, DistributionSpec, GoodSequence};
use crate::{Error, Result};

/// Relative tolerance between the two evaluations of `d_n`.
pub const D_ORACLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    pub n: u64,
    pub t: f64,
    /// `A_n = Σ_k P(X_k > t)`.
    pub a: f64,
    /// `B̄_n = Σ_k P(X_k ≥ t)`.
    pub bbar: f64,
    /// `d_n = Σ_k E[X_k 1{X_k ≤ t}]`.
    pub d: f64,
}

impl ExactMoments {
    pub fn compute(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<Self> {
        Ok(ExactMoments {
            n,
            t,
            a: exact_a(n, t, dist, seq)?,
            bbar: exact_bbar(n, t, dist, seq)?,
            d: exact_d(n, t, dist, seq)?,
        })
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::Domain(format!("truncation level must be finite and >= 1, got {t}")));
    }
    Ok(())
}

/// `A_n = n·F(1/λ_{j_t − 1})`.
pub fn exact_a(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    check_t(t)?;
    let j_t = seq.index_above(t)?;
    Ok(n as f64 * digit_tail(j_t - 1, dist, seq))
}

/// `B̄_n = n·F(1/λ_{s − 1})` where `λ_s` is the smallest element `≥ t`.
pub fn exact_bbar(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    check_t(t)?;
    let s = seq.index_at_or_above(t)?;
    Ok(n as f64 * digit_tail(s - 1, dist, seq))
}

/// `d_n` from the defining sum `n·Σ_{s=1}^{j_t−1} λ_s p_s`.
pub fn exact_d_brute(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    check_t(t)?;
    let top = seq.index_above(t)? - 1;
    let mut acc = CompensatedSum::new();
    for s in 1..=top {
        acc.add(seq.lambda(s) * digit_mass(s, dist, seq)?);
    }
    Ok(n as f64 * acc.value())
}

/// `d_n` after summation by parts:
/// `n(λ_1 + Σ_{j=2}^{j_t−1} F(1/λ_{j−1})(λ_j − λ_{j−1}) − λ_{j_t−1} F(1/λ_{j_t−1}))`.
pub fn exact_d_abel(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    check_t(t)?;
    let top = seq.index_above(t)? - 1;
    if top == 0 {
        return Ok(0.0);
    }
    let mut acc = CompensatedSum::new();
    acc.add(seq.lambda(1));
    for j in 2..=top {
        acc.add(digit_tail(j - 1, dist, seq) * (seq.lambda(j) - seq.lambda(j - 1)));
    }
    acc.add(-seq.lambda(top) * digit_tail(top, dist, seq));
    Ok(n as f64 * acc.value())
}

/// `d_n`, evaluated both ways; disagreement is an internal error.
pub fn exact_d(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    let brute = exact_d_brute(n, t, dist, seq)?;
    let abel = exact_d_abel(n, t, dist, seq)?;
    let scale = brute.abs().max(abel.abs());
    if (brute - abel).abs() > D_ORACLE_TOL * scale {
        return Err(Error::Consistency(format!(
            "d_n disagrees between the defining sum ({brute}) and summation by parts ({abel})"
        )));
    }
    Ok(brute)
}

/// `n·(C₁·φ(t) + λ_1 − C₂)`, a lower bound for `d_n` once `t ≥ λ_1`.
pub fn d_lower_bound(n: u64, t: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    check_t(t)?;
    if t < seq.lambda(1) {
        return Err(Error::Domain(format!("the d_n lower bound needs t >= lambda_1, got {t}")));
    }
    Ok(n as f64 * (dist.c1() * seq.phi(t)? + seq.lambda(1) - dist.c2()))
}

/// `β = margin·(1 + ε₀)·max_{1 ≤ n ≤ n_max} A_n/n^{1−γ}` with `t_n = n^γ`.
pub fn choose_beta(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    gamma: f64,
    n_max: u64,
    eps0: f64,
    margin: f64,
) -> Result<f64> {
    choose_beta_between(dist, seq, gamma, 1, n_max, eps0, margin)
}

/// [`choose_beta`] with the maximum taken over `n_min ≤ n ≤ n_max`.
///
/// `s(n) = j_{t_n} − 1` is nondecreasing, and on each run of constant `s`
/// the ratio `n^γ F(1/λ_s)` increases with `n`; so only the last `n` of
/// each run is evaluated.
pub fn choose_beta_between(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    gamma: f64,
    n_min: u64,
    n_max: u64,
    eps0: f64,
    margin: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::config(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    if !(eps0 >= 0.0 && eps0.is_finite()) {
        return Err(Error::config(format!("eps0 must be >= 0, got {eps0}")));
    }
    if !(margin >= 1.0 && margin.is_finite()) {
        return Err(Error::config(format!("margin must be >= 1, got {margin}")));
    }
    if n_min == 0 || n_min > n_max {
        return Err(Error::config(format!("need 1 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    let t = |n: u64| truncation_level(n, gamma);
    let ratio = |n: u64| -> Result<f64> {
        Ok(exact_a(n, t(n), dist, seq)? / (n as f64).powf(1.0 - gamma))
    };
    let mut best = 0.0f64;
    let mut n = n_min;
    loop {
        let next_lambda = seq.lambda(seq.index_above(t(n))?);
        let mut last = (next_lambda.powf(1.0 / gamma).floor() as u64).clamp(n, n_max);
        while last > n && t(last) >= next_lambda {
            last -= 1;
        }
        while last < n_max && t(last + 1) < next_lambda {
            last += 1;
        }
        best = best.max(ratio(last)?);
        if last >= n_max {
            break;
        }
        n = last + 1;
    }
    Ok(margin * (1.0 + eps0) * best)
}
