use serde::{Deserialize, Serialize};

use super::phi::log_grid;
use super::series::MomentWalker;
use crate::model::{DistributionSpec, GoodSequence};
use crate::{Error, Result};

/// Ratio used by the geometric certificate.
pub const GEOMETRIC_Q: f64 = 0.99;
/// Power demanded by the p-series certificate.
pub const POWER_P: f64 = 2.0;
/// Largest `n` examined when looking for a certificate.
pub const CERTIFICATE_HORIZON: f64 = 1e15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `s(n + 1)/s(n) ≤ q` for every examined `n ≥ from_n`.
    Geometric { from_n: u64, q: f64 },
    /// `s(n) ≤ n^{−p}` with `−log s(n)/log n` nondecreasing for every
    /// examined `n ≥ from_n`; the tail beyond `from_n` is at most
    /// `tail_bound`.
    PowerLaw { from_n: u64, p: f64, tail_bound: f64 },
    /// `n·s(n) ≥ 1` at every examined `n ≥ n_max/2`.
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub name: String,
    pub partial_sum: f64,
    pub last_summand: f64,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummabilityReport {
    pub gamma: f64,
    pub c: f64,
    pub n_max: u64,
    /// `Σ exp(−c·n·log²t_n/t_n²)`.
    pub log_ratio_series: SeriesReport,
    /// `Σ exp(−c·n/t_n)`.
    pub linear_series: SeriesReport,
    /// `Σ exp(−c·d_n²/(n t_n²))` for the model itself.
    pub model_d_series: SeriesReport,
    /// `Σ exp(−c·A_n)` for the model itself.
    pub model_a_series: SeriesReport,
    /// `min d_n/(n log t_n)` over `λ_2 ≤ t_n`, `n ≤ n_max`, and
    /// `min A_n t_n/n` over `n ≤ n_max`. The model
    /// certificates assume these minima persist beyond `n_max`.
    pub d_constant: f64,
    pub a_constant: f64,
}

/// Certificate for a series given its log-summand `ln s(n)` as a closed form.
fn certify(log_s: &dyn Fn(f64) -> f64, n_max: u64) -> Certificate {
    let decades = CERTIFICATE_HORIZON.log10();
    let grid: Vec<f64> = log_grid(1.0, CERTIFICATE_HORIZON, (decades * 200.0) as usize)
        .into_iter()
        .map(f64::floor)
        .collect();
    let half = (n_max / 2).max(1) as f64;
    if grid
        .iter()
        .filter(|&&n| n >= half)
        .all(|&n| log_s(n) + n.ln() >= 0.0)
    {
        return Certificate::Divergent;
    }
    // scan from the far end and keep extending the run on which the property holds
    let mut geo_from = None;
    for &n in grid.iter().rev() {
        if log_s(n + 1.0) - log_s(n) <= GEOMETRIC_Q.ln() {
            geo_from = Some(n);
        } else {
            break;
        }
    }
    if let Some(n) = geo_from {
        return Certificate::Geometric {
            from_n: n as u64,
            q: GEOMETRIC_Q,
        };
    }
    let power = |n: f64| -log_s(n) / n.ln();
    let mut pow_from = None;
    let mut next_power = f64::INFINITY;
    for &n in grid.iter().rev().filter(|&&n| n >= 2.0) {
        let p = power(n);
        if p >= POWER_P && p <= next_power {
            pow_from = Some(n);
            next_power = p;
        } else {
            break;
        }
    }
    match pow_from {
        Some(n) => Certificate::PowerLaw {
            from_n: n as u64,
            p: POWER_P,
            tail_bound: n.powf(1.0 - POWER_P) / (POWER_P - 1.0),
        },
        None => Certificate::Inconclusive,
    }
}

fn closed_form_series(name: &str, log_s: &dyn Fn(f64) -> f64, n_max: u64) -> SeriesReport {
    let mut sum = 0.0;
    let mut last = 0.0;
    for n in 1..=n_max {
        last = log_s(n as f64).exp();
        sum += last;
    }
    SeriesReport {
        name: name.into(),
        partial_sum: sum,
        last_summand: last,
        certificate: certify(log_s, n_max),
    }
}

/// Partial sums of the two series behind the Lemma 6 conditions, with
/// certificates of convergence for their closed forms, and the same sums
/// computed from the exact model quantities.
pub fn summability_check(
    dist: &DistributionSpec,
    seq: &GoodSequence,
    gamma: f64,
    c: f64,
    n_max: u64,
) -> Result<SummabilityReport> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::config(format!("gamma must lie in (0, 1/2), got {gamma}")));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::input(format!("c must be >= 0, got {c}")));
    }
    if n_max == 0 {
        return Err(Error::input("n_max must be positive"));
    }
    let log_ratio = move |n: f64| {
        let t = n.powf(gamma);
        let lt = t.ln();
        -c * n * lt * lt / (t * t)
    };
    let linear = move |n: f64| -c * n / n.powf(gamma);
    let log_ratio_series = closed_form_series("exp(-c n log^2 t / t^2)", &log_ratio, n_max);
    let linear_series = closed_form_series("exp(-c n / t)", &linear, n_max);

    let lambda2 = seq.lambda(2);
    let mut walker = MomentWalker::new(dist, seq, gamma);
    let (mut sd, mut sa, mut last_d, mut last_a) = (0.0, 0.0, 0.0, 0.0);
    let (mut d_const, mut a_const) = (f64::INFINITY, f64::INFINITY);
    for n in 1..=n_max {
        let (t, a, d) = walker.at(n)?;
        last_d = (-c * d * d / (n as f64 * t * t)).exp();
        last_a = (-c * a).exp();
        sd += last_d;
        sa += last_a;
        if t >= lambda2 {
            d_const = d_const.min(d / (n as f64 * t.ln()));
        }
        a_const = a_const.min(a * t / n as f64);
    }
    // d_n ≥ c_d·n·log t_n and A_n ≥ c_a·n/t_n on the range turn the model
    // series into the closed forms with constants c·c_d² and c·c_a
    let comparison = |scale: f64, f: &dyn Fn(f64, f64) -> f64| {
        if scale.is_finite() && scale > 0.0 {
            certify(&|n| f(n, scale), n_max)
        } else {
            Certificate::Inconclusive
        }
    };
    let d_cert = comparison(d_const * d_const, &|n, k| k * log_ratio(n));
    let a_cert = comparison(a_const, &|n, k| k * linear(n));
    let model_series = |name: &str, sum: f64, last: f64, certificate| SeriesReport {
        name: name.into(),
        partial_sum: sum,
        last_summand: last,
        certificate,
    };
    Ok(SummabilityReport {
        gamma,
        c,
        n_max,
        log_ratio_series,
        linear_series,
        model_d_series: model_series("exp(-c d_n^2 / (n t^2))", sd, last_d, d_cert),
        model_a_series: model_series("exp(-c A_n)", sa, last_a, a_cert),
        d_constant: d_const,
        a_constant: a_const,
    })
}
