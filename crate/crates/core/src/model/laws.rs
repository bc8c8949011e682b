//! Closed-form probability laws of the model.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::distribution::DistributionSpec;
use super::family::{big_rational, ExpansionFamily};
use super::sequence::GoodSequence;
use crate::{Error, Result};

/// `P(X = λ_s) = F(1/λ_{s−1}) − F(1/λ_s)` with `F(1/λ_0) = 1`.
pub fn digit_mass(s: u64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    if s == 0 {
        return Err(Error::input("digit_mass is indexed from s = 1"));
    }
    let upper = dist.cdf(seq.inv_lambda(s - 1));
    let lower = dist.cdf(seq.inv_lambda(s));
    Ok((upper - lower).max(0.0))
}

/// `P(X > λ_s) = F(1/λ_s)`, the tail beyond atom `s`.
pub fn digit_tail(s: u64, dist: &DistributionSpec, seq: &GoodSequence) -> f64 {
    dist.cdf(seq.inv_lambda(s))
}

/// `δ(h, k, y) = φ(h)(1 + y) / (k + φ(h)·y)` evaluated for `phi_val = φ(h)`.
pub fn delta(phi_val: f64, k: f64, y: f64) -> Result<f64> {
    if !(phi_val > 0.0 && phi_val.is_finite()) {
        return Err(Error::Domain(format!("phi must be positive, got {phi_val}")));
    }
    if !(y >= 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("y must be >= 0, got {y}")));
    }
    if !(k >= phi_val) {
        return Err(Error::Domain(format!("digit k = {k} is below phi = {phi_val}")));
    }
    Ok(phi_val * (1.0 + y) / (k + phi_val * y))
}

/// Exact `δ` for rational arguments.
pub fn delta_exact(phi: &BigRational, k: &BigRational, y: &BigRational) -> BigRational {
    let one = BigRational::one();
    (phi * (&one + y)) / (k + phi * y)
}

/// `R = 1/δ = (k + φ·y) / (φ(1 + y))`.
pub fn ratio_exact(phi: &BigRational, k: &BigRational, y: &BigRational) -> BigRational {
    let one = BigRational::one();
    (k + phi * y) / (phi * (&one + y))
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `P(B_{step+1} = h | B_1..B_step = history)` under the conditional digit law.
///
/// The admissible range is `h ≥ ⌈φ_step(b)⌉` where `b` is the last digit in
/// `history`. When `φ_step(b)` is an integer this is exactly
/// `F(δ(b, h, y)) − F(δ(b, h + 1, y))`; otherwise the minimal digit carries the
/// leftover mass `1 − F(δ(b, h_min + 1, y))`, which is also what the
/// inversion sampler produces.
pub fn conditional_digit_mass(
    fam: &ExpansionFamily,
    dist: &DistributionSpec,
    step: usize,
    history: &[BigUint],
    h: &BigUint,
) -> Result<f64> {
    let b = history
        .last()
        .ok_or_else(|| Error::input("digit history must not be empty"))?;
    let phi = fam.phi(step, b);
    if phi <= BigRational::zero() {
        return Err(Error::Domain(format!("phi_{step}({b}) is not positive")));
    }
    let y = fam.y(step, history);
    let h_min = fam.min_successor(step, b);
    if h < &h_min {
        return Err(Error::Domain(format!("digit {h} is below the admissible minimum {h_min}")));
    }
    let k = big_rational(h.clone());
    let next = &k + BigRational::one();
    let lower = dist.cdf(rational_to_f64(&delta_exact(&phi, &next, &y)));
    let upper = if *h == h_min {
        1.0
    } else {
        dist.cdf(rational_to_f64(&delta_exact(&phi, &k, &y)))
    };
    Ok((upper - lower).max(0.0))
}
