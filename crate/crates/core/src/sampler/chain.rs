use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rng::{check_open_unit, RngStream};
use crate::model::{
    delta_exact, rational_to_f64, ratio_exact, DistributionSpec, ExpansionFamily, GoodSequence,
};
use crate::{Error, Result};

pub const DEFAULT_MAX_CHAIN_LEN: usize = 1000;
pub const DEFAULT_MAX_DIGIT_BITS: u64 = 1 << 20;

/// Resource caps for full chains. Engel-type digits grow like `eⁿ`, and
/// `φ(h) = h(h − 1)` squares them at every step, so both the length and the
/// digit size are bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainLimits {
    pub max_len: usize,
    pub max_digit_bits: u64,
}

impl Default for ChainLimits {
    fn default() -> Self {
        ChainLimits {
            max_len: DEFAULT_MAX_CHAIN_LEN,
            max_digit_bits: DEFAULT_MAX_DIGIT_BITS,
        }
    }
}

/// An exact ratio `num/den` together with its nearest f64.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactRatio {
    pub num: BigUint,
    pub den: BigUint,
}

impl ExactRatio {
    pub fn to_f64(&self) -> f64 {
        crate::model::ratio_to_f64(&self.num, &self.den)
    }

    /// `self < x` for an f64 `x`, decided without rounding.
    pub fn lt_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(x) => self.as_rational() < x,
            None => x == f64::INFINITY,
        }
    }

    /// `self ≥ x`, exactly.
    pub fn ge_f64(&self, x: f64) -> bool {
        !self.lt_f64(x)
    }

    fn as_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num.clone()), BigInt::from(self.den.clone()))
    }
}

/// One sampled path: digits `B_1..B_{n+1}`, ratios `R_1..R_n` and the
/// discretized `X_j = λ_{j_{R_j}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainPath {
    pub digits: Vec<BigUint>,
    pub ratios: Vec<ExactRatio>,
    pub atoms: Vec<u64>,
    pub xs: Vec<f64>,
}

impl ChainPath {
    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn ratios_f64(&self) -> Vec<f64> {
        self.ratios.iter().map(ExactRatio::to_f64).collect()
    }

    /// Re-derive every invariant: admissibility of each digit, the ratio
    /// formula, `X_j = λ_{j_{R_j}}` and the exact bracket `X_j − ℓ ≤ R_j < X_j`.
    pub fn verify(&self, fam: &ExpansionFamily, seq: &GoodSequence) -> Result<()> {
        if self.digits.len() != self.ratios.len() + 1 || self.xs.len() != self.ratios.len() {
            return Err(Error::Consistency("chain path has mismatched lengths".into()));
        }
        for j in 0..self.ratios.len() {
            let step = j + 1;
            let history = &self.digits[..=j];
            let b = &self.digits[j];
            let next = &self.digits[j + 1];
            if next < &fam.min_successor(step, b) {
                return Err(Error::Consistency(format!("digit B_{} = {next} is inadmissible", j + 2)));
            }
            let expected = exact_ratio(fam, step, history, next);
            if expected.as_rational() != self.ratios[j].as_rational() {
                return Err(Error::Consistency(format!("R_{step} does not match its digits")));
            }
            let s = seq.index_above_ratio(&self.ratios[j].num, &self.ratios[j].den)?;
            if s != self.atoms[j] || seq.lambda(s) != self.xs[j] {
                return Err(Error::Consistency(format!("X_{step} is not lambda_(j_R)")));
            }
            let r = &self.ratios[j];
            if !(r.lt_f64(self.xs[j]) && r.ge_f64(self.xs[j] - seq.ell())) {
                return Err(Error::Consistency(format!("bracket X - ell <= R < X fails at {step}")));
            }
        }
        Ok(())
    }
}

/// Smallest admissible `h ≥ h_min` with `F(δ(h + 1)) ≤ u`, for the kernel
/// value `phi` and offset `y`.
///
/// With `V = F⁻¹(u)` this is `h = ⌈φ(1 + y)/V − φy⌉ − 1`, evaluated in exact
/// rational arithmetic (an f64 is a dyadic rational), then clamped to
/// `h_min`. When `F⁻¹` is only numerical the result is corrected by at most
/// one step against the defining inequality.
fn invert_tail(
    phi: &BigRational,
    y: &BigRational,
    h_min: &BigUint,
    u: f64,
    dist: &DistributionSpec,
) -> Result<BigUint> {
    let v = dist.inverse(u);
    if !(v > 0.0) {
        return Err(Error::Resample);
    }
    let mut h = if y.is_zero() && phi.is_integer() {
        integral_tail_index(phi.numer().magnitude(), v)
    } else {
        let v = BigRational::from_float(v).ok_or(Error::Resample)?;
        let one = BigRational::one();
        let q = phi * (&one + y) / v - phi * y;
        let c = q.ceil().to_integer() - BigInt::one();
        if c.is_negative() {
            BigUint::zero()
        } else {
            c.magnitude().clone()
        }
    };
    if &h < h_min {
        h = h_min.clone();
    }
    if !dist.has_exact_inverse() {
        let tail = |k: &BigUint| {
            let k = BigRational::from_integer(BigInt::from(k.clone()));
            dist.cdf(rational_to_f64(&delta_exact(phi, &k, y)))
        };
        if tail(&(&h + 1u32)) > u {
            h += 1u32;
        } else if &h > h_min && u >= tail(&h) {
            h -= 1u32;
        }
    }
    Ok(h)
}

/// `⌈φ/v⌉ − 1` for integer `φ ≥ 1` and `v ∈ (0, 1)`, i.e.
/// `⌊(φ·2^k − 1)/m⌋` where `v = m/2^k`.
fn integral_tail_index(phi: &BigUint, v: f64) -> BigUint {
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, shift) = if exp == 0 {
        (frac, 1074)
    } else {
        (frac | (1u64 << 52), 1075 - exp)
    };
    let tz = mantissa.trailing_zeros() as i64;
    let (m, k) = (mantissa >> tz, shift - tz);
    let scaled: BigUint = if k >= 0 {
        phi << (k as u64)
    } else {
        phi >> ((-k) as u64)
    };
    if scaled.is_zero() {
        return BigUint::zero();
    }
    (scaled - 1u32) / m
}

fn draw_uniform(rng: &mut RngStream) -> f64 {
    loop {
        if let Ok(u) = check_open_unit(rng.uniform_open()) {
            return u;
        }
    }
}

/// Next digit `B_{step+1}` given `history = B_1..B_step`, by tail inversion
/// of the conditional digit law: the smallest admissible `h` with
/// `F(δ(b, h + 1, y)) ≤ u`.
pub fn next_digit(
    fam: &ExpansionFamily,
    dist: &DistributionSpec,
    step: usize,
    history: &[BigUint],
    u: f64,
) -> Result<BigUint> {
    let u = check_open_unit(u)?;
    let b = history
        .last()
        .ok_or_else(|| Error::input("digit history must not be empty"))?;
    let phi = fam.phi(step, b);
    if phi <= BigRational::zero() {
        return Err(Error::Domain(format!("phi_{step}({b}) is not positive")));
    }
    let y = fam.y(step, history);
    let h_min = fam.min_successor(step, b);
    invert_tail(&phi, &y, &h_min, u, dist)
}

/// `B_1` from the virtual step-0 kernel `φ_0 ≡ min_first_digit`, `y ≡ 0`,
/// so that `P(B_1 > h) = F(min_first_digit/(h + 1))`.
pub fn first_digit(fam: &ExpansionFamily, dist: &DistributionSpec, u: f64) -> Result<BigUint> {
    let u = check_open_unit(u)?;
    let m = fam.min_first_digit();
    let phi = BigRational::from_integer(BigInt::from(m.clone()));
    invert_tail(&phi, &BigRational::zero(), &m, u, dist)
}

fn exact_ratio(fam: &ExpansionFamily, step: usize, history: &[BigUint], next: &BigUint) -> ExactRatio {
    let phi = fam.phi(step, history.last().expect("non-empty history"));
    let y = fam.y(step, history);
    let k = BigRational::from_integer(BigInt::from(next.clone()));
    if y.is_zero() && phi.is_integer() {
        return ExactRatio {
            num: next.clone(),
            den: phi.numer().magnitude().clone(),
        };
    }
    let r = ratio_exact(&phi, &k, &y);
    ExactRatio {
        num: r.numer().magnitude().clone(),
        den: r.denom().magnitude().clone(),
    }
}

/// Sample `B_1..B_{n+1}` and the derived `R_1..R_n`, `X_1..X_n`.
pub fn sample_chain(
    fam: &ExpansionFamily,
    dist: &DistributionSpec,
    seq: &GoodSequence,
    n: usize,
    rng: &mut RngStream,
    limits: ChainLimits,
) -> Result<ChainPath> {
    if n == 0 {
        return Err(Error::input("sample_chain needs n >= 1"));
    }
    if n > limits.max_len {
        return Err(Error::config(format!(
            "chain length {n} exceeds the cap of {}",
            limits.max_len
        )));
    }
    let mut digits = Vec::with_capacity(n + 1);
    digits.push(first_digit(fam, dist, draw_uniform(rng))?);
    let mut ratios = Vec::with_capacity(n);
    let mut atoms = Vec::with_capacity(n);
    let mut xs = Vec::with_capacity(n);
    for step in 1..=n {
        let next = next_digit(fam, dist, step, &digits, draw_uniform(rng))?;
        if next.bits() > limits.max_digit_bits {
            return Err(Error::config(format!(
                "digit B_{} needs {} bits, above the cap of {}",
                step + 1,
                next.bits(),
                limits.max_digit_bits
            )));
        }
        let ratio = exact_ratio(fam, step, &digits, &next);
        let s = seq.index_above_ratio(&ratio.num, &ratio.den)?;
        atoms.push(s);
        xs.push(seq.lambda(s));
        ratios.push(ratio);
        digits.push(next);
    }
    Ok(ChainPath {
        digits,
        ratios,
        atoms,
        xs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{conditional_digit_mass, DigitKernel};
    use num_traits::ToPrimitive;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn next_digit_examples() {
        let id = DistributionSpec::identity();
        let engel = ExpansionFamily::engel();
        assert_eq!(next_digit(&engel, &id, 1, &[big(2)], 0.5).unwrap(), big(3));
        assert_eq!(next_digit(&engel, &id, 1, &[big(2)], 1.0 - 1e-12).unwrap(), big(2));
        let luroth = ExpansionFamily::luroth_type();
        // P(B > 3 | b = 2) = 1/2 > 0.4 ≥ P(B > 4 | b = 2) = 2/5
        assert_eq!(next_digit(&luroth, &id, 1, &[big(2)], 0.4).unwrap(), big(4));
        assert_eq!(next_digit(&luroth, &id, 1, &[big(2)], 0.7).unwrap(), big(2));
        assert!(matches!(next_digit(&engel, &id, 1, &[big(2)], 0.0), Err(Error::Resample)));
        assert!(matches!(next_digit(&engel, &id, 1, &[big(2)], 1.0), Err(Error::Resample)));
    }

    #[test]
    fn integral_fast_path_matches_rational_route() {
        let mut rng = RngStream::new(3, 3);
        for _ in 0..5000 {
            let v = rng.uniform_open();
            let phi = big(1 + rng.next_u64() % 1_000_000);
            let fast = integral_tail_index(&phi, v);
            let q = BigRational::from_integer(BigInt::from(phi.clone()))
                / BigRational::from_float(v).unwrap();
            let slow = q.ceil().to_integer() - BigInt::one();
            assert_eq!(BigInt::from(fast), slow);
        }
    }

    #[test]
    fn inversion_hits_the_conditional_law() {
        // Empirical frequencies of B_2 | B_1 = b against conditional_digit_mass.
        let id = DistributionSpec::quadratic();
        let fam = ExpansionFamily::luroth_type();
        let b = big(3);
        let mut rng = RngStream::new(17, 0);
        let m = 200_000;
        let mut counts = std::collections::BTreeMap::new();
        for _ in 0..m {
            let h = next_digit(&fam, &id, 1, std::slice::from_ref(&b), rng.uniform_open()).unwrap();
            *counts.entry(h.to_u64().unwrap()).or_insert(0u64) += 1;
        }
        for h in 6u64..12 {
            let p = conditional_digit_mass(&fam, &id, 1, std::slice::from_ref(&b), &big(h)).unwrap();
            let f = *counts.get(&h).unwrap_or(&0) as f64 / m as f64;
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!((f - p).abs() < 4.5 * se, "h = {h}: {f} vs {p}");
        }
    }

    #[test]
    fn engel_single_step_ratio() {
        let id = DistributionSpec::identity();
        let engel = ExpansionFamily::engel();
        let ints = GoodSequence::integers();
        let mut rng = RngStream::new(1, 1);
        let path = sample_chain(&engel, &id, &ints, 1, &mut rng, ChainLimits::default()).unwrap();
        assert!(path.digits[1] >= path.digits[0]);
        assert_eq!(path.ratios[0].num, path.digits[1]);
        assert_eq!(path.ratios[0].den, path.digits[0]);
        path.verify(&engel, &ints).unwrap();
    }

    #[test]
    fn paths_satisfy_invariants() {
        let seqs = [GoodSequence::integers(), GoodSequence::scaled(3).unwrap()];
        let dists = [DistributionSpec::identity(), DistributionSpec::polynomial(&[0.6, 0.4]).unwrap()];
        for (i, seq) in seqs.iter().enumerate() {
            for dist in &dists {
                for p in 0..40 {
                    let mut rng = RngStream::new(i as u64, p);
                    let fam = ExpansionFamily::engel();
                    let path = sample_chain(&fam, dist, seq, 60, &mut rng, ChainLimits::default())
                        .unwrap();
                    path.verify(&fam, seq).unwrap();
                }
            }
        }
    }

    #[test]
    fn long_engel_chain_within_caps() {
        let fam = ExpansionFamily::engel();
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        let mut rng = RngStream::new(99, 0);
        let path = sample_chain(&fam, &id, &ints, 1000, &mut rng, ChainLimits::default()).unwrap();
        assert!(path.digits.last().unwrap().bits() > 500);
        path.verify(&fam, &ints).unwrap();
        let err = sample_chain(&fam, &id, &ints, 1001, &mut rng, ChainLimits::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn luroth_digits_hit_the_bit_cap() {
        let fam = ExpansionFamily::luroth_type();
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        let limits = ChainLimits {
            max_len: 1000,
            max_digit_bits: 4096,
        };
        let mut hit = false;
        for p in 0..20 {
            let mut rng = RngStream::new(5, p);
            if let Err(Error::Config(_)) = sample_chain(&fam, &id, &ints, 200, &mut rng, limits) {
                hit = true;
            }
        }
        assert!(hit);
    }

    struct Shifted;

    impl DigitKernel for Shifted {
        fn phi(&self, _step: usize, digit: &BigUint) -> BigRational {
            BigRational::from_integer(BigInt::from(digit.clone()))
        }

        fn y(&self, _step: usize, history: &[BigUint]) -> BigRational {
            BigRational::new(BigInt::from(history.len() as u64 % 3), BigInt::one())
        }
    }

    #[test]
    fn custom_kernel_with_offsets() {
        let fam = ExpansionFamily::custom(Shifted);
        let id = DistributionSpec::identity();
        let ints = GoodSequence::integers();
        for p in 0..30 {
            let mut rng = RngStream::new(8, p);
            let path = sample_chain(&fam, &id, &ints, 30, &mut rng, ChainLimits::default()).unwrap();
            path.verify(&fam, &ints).unwrap();
        }
    }
}
