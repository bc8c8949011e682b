use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::{Error, Result};

/// Largest index the affine fast paths hand out as `u64`.
const MAX_INDEX: f64 = 9.0e18;

type LambdaRule = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// Which built-in (or user) rule generates the sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    /// `λ_j = j`.
    Integers,
    /// `λ_j = step · j` for an integer `step ≥ 1`.
    Scaled { step: u64 },
    /// User-supplied rule with a certified gap bound.
    Custom,
}

/// A good sequence `Λ = (λ_j)`: `λ_0 = 0`, `λ_j ≥ 1` for `j ≥ 1`, strictly
/// increasing, unbounded, with gaps bounded by `ell`.
///
/// Values are immutable after construction and can be shared freely across
/// worker threads.
#[derive(Clone)]
pub struct GoodSequence {
    kind: SequenceKind,
    ell: f64,
    rule: Option<LambdaRule>,
}

impl fmt::Debug for GoodSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GoodSequence")
            .field("kind", &self.kind)
            .field("ell", &self.ell)
            .finish()
    }
}

impl GoodSequence {
    pub fn integers() -> Self {
        GoodSequence {
            kind: SequenceKind::Integers,
            ell: 1.0,
            rule: None,
        }
    }

    pub fn scaled(step: u64) -> Result<Self> {
        if step == 0 {
            return Err(Error::input("scaled sequence needs step >= 1"));
        }
        if step == 1 {
            return Ok(Self::integers());
        }
        Ok(GoodSequence {
            kind: SequenceKind::Scaled { step },
            ell: step as f64,
            rule: None,
        })
    }

    /// A user sequence. `rule(0)` must be 0; the caller certifies `ell` as a
    /// bound on every gap. Use [`GoodSequence::check_prefix`] to verify a
    /// finite prefix.
    pub fn custom<F>(rule: F, ell: f64) -> Result<Self>
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::input(format!("gap bound must be positive, got {ell}")));
        }
        let seq = GoodSequence {
            kind: SequenceKind::Custom,
            ell,
            rule: Some(Arc::new(rule)),
        };
        seq.check_prefix(64)?;
        Ok(seq)
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    /// The gap bound `ℓ = sup_j (λ_{j+1} − λ_j)`.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Integer step for the affine built-ins.
    fn step(&self) -> Option<u64> {
        match self.kind {
            SequenceKind::Integers => Some(1),
            SequenceKind::Scaled { step } => Some(step),
            SequenceKind::Custom => None,
        }
    }

    pub fn lambda(&self, j: u64) -> f64 {
        match (self.step(), &self.rule) {
            (Some(step), _) => (step as f64) * (j as f64),
            (None, Some(rule)) => rule(j),
            (None, None) => unreachable!("custom sequence without a rule"),
        }
    }

    /// Reciprocal `1/λ_j`, with the convention `1/λ_0 = +∞`.
    pub fn inv_lambda(&self, j: u64) -> f64 {
        if j == 0 {
            f64::INFINITY
        } else {
            1.0 / self.lambda(j)
        }
    }

    /// `j_u`: the index with `λ_{j_u − 1} ≤ u < λ_{j_u}`.
    pub fn index_above(&self, u: f64) -> Result<u64> {
        if !u.is_finite() {
            return Err(Error::input(format!("index_above needs a finite u, got {u}")));
        }
        if u < 0.0 {
            return Err(Error::Domain(format!("index_above needs u >= 0, got {u}")));
        }
        match self.step() {
            Some(step) => {
                let q = (u / step as f64).floor();
                if q >= MAX_INDEX {
                    return Err(Error::Domain(format!("u = {u} is beyond the indexable range")));
                }
                let mut j = q as u64 + 1;
                // floor(u/step) can be off by one when u/step rounds onto an integer
                while j > 1 && self.lambda(j - 1) > u {
                    j -= 1;
                }
                while self.lambda(j) <= u {
                    j += 1;
                }
                Ok(j)
            }
            None => Ok(self.search_above(|lam| lam <= u)),
        }
    }

    /// Smallest index `s ≥ 1` with `λ_s ≥ t`.
    pub fn index_at_or_above(&self, t: f64) -> Result<u64> {
        if !t.is_finite() {
            return Err(Error::input(format!("index_at_or_above needs a finite t, got {t}")));
        }
        match self.step() {
            Some(step) => {
                let q = (t / step as f64).ceil().max(1.0);
                if q >= MAX_INDEX {
                    return Err(Error::Domain(format!("t = {t} is beyond the indexable range")));
                }
                let mut s = q as u64;
                while s > 1 && self.lambda(s - 1) >= t {
                    s -= 1;
                }
                while self.lambda(s) < t {
                    s += 1;
                }
                Ok(s)
            }
            None => Ok(self.search_above(|lam| lam < t)),
        }
    }

    /// Exact `j_u` for the ratio `num/den`. Affine sequences never round;
    /// custom sequences fall back to the floating-point search.
    pub fn index_above_ratio(&self, num: &BigUint, den: &BigUint) -> Result<u64> {
        if den.is_zero() {
            return Err(Error::Domain("ratio with zero denominator".into()));
        }
        match self.step() {
            Some(step) => (num / (den * step))
                .to_u64()
                .and_then(|q| q.checked_add(1))
                .ok_or_else(|| Error::Domain("ratio is beyond the indexable range".into())),
            None => {
                let u = ratio_to_f64(num, den);
                if !u.is_finite() {
                    return Err(Error::Domain("ratio does not fit in f64".into()));
                }
                self.index_above(u)
            }
        }
    }

    /// Smallest `j ≥ 1` such that `keep_going(λ_j)` is false, by galloping
    /// followed by bisection.
    fn search_above(&self, keep_going: impl Fn(f64) -> bool) -> u64 {
        let mut lo = 0u64; // keep_going(λ_lo) holds, or lo == 0
        let mut hi = 1u64;
        while keep_going(self.lambda(hi)) {
            lo = hi;
            hi = hi.saturating_mul(2);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if keep_going(self.lambda(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `φ(u) = Σ_{j=2}^{j_u − 1} (λ_j − λ_{j−1}) / λ_{j−1}`, zero for an empty
    /// sum. Affine sequences give the harmonic number `H_{j_u − 2}`, which is
    /// evaluated in closed form so arbitrarily large `u` are cheap.
    pub fn phi(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::input(format!("phi needs a finite u, got {u}")));
        }
        if u <= 0.0 {
            return Ok(0.0);
        }
        match self.step() {
            Some(step) => {
                let q = (u / step as f64).floor();
                if q < MAX_INDEX {
                    let j_u = self.index_above(u)?;
                    Ok(harmonic(j_u.saturating_sub(2) as f64))
                } else {
                    Ok(harmonic(q - 1.0))
                }
            }
            None => {
                let j_u = self.index_above(u)?;
                let mut acc = Compensated::default();
                for j in 2..j_u {
                    let prev = self.lambda(j - 1);
                    acc.add((self.lambda(j) - prev) / prev);
                }
                Ok(acc.value())
            }
        }
    }

    /// Verify the good-sequence invariants on `λ_0..=λ_len`.
    pub fn check_prefix(&self, len: u64) -> Result<()> {
        if self.lambda(0) != 0.0 {
            return Err(Error::Model(format!("lambda_0 = {} must be 0", self.lambda(0))));
        }
        let mut prev = 0.0;
        for j in 1..=len {
            let cur = self.lambda(j);
            if !cur.is_finite() || cur < 1.0 {
                return Err(Error::Model(format!("lambda_{j} = {cur} must be >= 1")));
            }
            if cur <= prev {
                return Err(Error::Model(format!("sequence not strictly increasing at j = {j}")));
            }
            if cur - prev > self.ell {
                return Err(Error::Model(format!(
                    "gap lambda_{j} - lambda_{} = {} exceeds ell = {}",
                    j - 1,
                    cur - prev,
                    self.ell
                )));
            }
            prev = cur;
        }
        Ok(())
    }
}

/// `num/den` rounded to f64 without materialising a reduced fraction.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let sn = num.bits().saturating_sub(64);
    let sd = den.bits().saturating_sub(64);
    let n = (num >> sn).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> sd).to_f64().unwrap_or(f64::INFINITY);
    let e = sn as f64 - sd as f64;
    (n / d) * e.exp2()
}

/// `H_m = Σ_{k=1}^m 1/k` for integer-valued `m ≥ 0`; direct summation up to a
/// cutoff, asymptotic expansion beyond.
pub fn harmonic(m: f64) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    if m < 1.0 {
        return 0.0;
    }
    if m <= 64.0 {
        let mut acc = Compensated::default();
        for k in (1..=m as u64).rev() {
            acc.add(1.0 / k as f64);
        }
        return acc.value();
    }
    let inv = 1.0 / m;
    let inv2 = inv * inv;
    m.ln() + EULER_GAMMA + 0.5 * inv - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
}

// Small local accumulator so the model layer does not depend on trimstats.
#[derive(Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_above_examples() {
        let ints = GoodSequence::integers();
        assert_eq!(ints.index_above(2.5).unwrap(), 3);
        assert_eq!(ints.index_above(3.0).unwrap(), 4);
        let evens = GoodSequence::scaled(2).unwrap();
        assert_eq!(evens.index_above(6.0).unwrap(), 4);
        assert!(ints.index_above(f64::NAN).is_err());
        assert!(ints.index_above(f64::INFINITY).is_err());
    }

    #[test]
    fn index_above_is_consistent_with_lambda() {
        let custom = GoodSequence::custom(|j| if j == 0 { 0.0 } else { 1.5 * j as f64 - 0.5 }, 1.5)
            .unwrap();
        for seq in [GoodSequence::integers(), GoodSequence::scaled(3).unwrap(), custom] {
            for s in 1..200u64 {
                let lo = seq.lambda(s - 1);
                let hi = seq.lambda(s);
                for frac in [0.0, 0.25, 0.5, 0.999] {
                    let u = lo + frac * (hi - lo);
                    assert_eq!(seq.index_above(u).unwrap(), s, "{seq:?} u={u}");
                }
            }
        }
    }

    #[test]
    fn index_at_or_above_includes_the_atom() {
        let ints = GoodSequence::integers();
        assert_eq!(ints.index_at_or_above(10.0).unwrap(), 10);
        assert_eq!(ints.index_at_or_above(9.5).unwrap(), 10);
        let evens = GoodSequence::scaled(2).unwrap();
        assert_eq!(evens.index_at_or_above(1.0).unwrap(), 1);
        assert_eq!(evens.index_at_or_above(5.0).unwrap(), 3);
    }

    #[test]
    fn exact_index_on_integer_boundaries() {
        let ints = GoodSequence::integers();
        let big = |n: u64| BigUint::from(n);
        assert_eq!(ints.index_above_ratio(&big(9), &big(3)).unwrap(), 4);
        let scale = BigUint::from(10u32).pow(30);
        let just_below = &scale * 4u32 - 1u32;
        assert_eq!(ints.index_above_ratio(&just_below, &scale).unwrap(), 4);
        assert_eq!(ratio_to_f64(&just_below, &scale), 4.0);
        let huge = BigUint::from(1u32) << 100u32;
        let r = ratio_to_f64(&huge, &big(3));
        assert!((r / (2f64.powi(100) / 3.0) - 1.0).abs() < 1e-15);
        assert!((ratio_to_f64(&big(3), &huge) * 2f64.powi(100) / 3.0 - 1.0).abs() < 1e-15);
        let evens = GoodSequence::scaled(2).unwrap();
        assert_eq!(evens.index_above_ratio(&big(13), &big(2)).unwrap(), 4);
    }

    #[test]
    fn phi_examples() {
        let ints = GoodSequence::integers();
        assert!((ints.phi(5.0).unwrap() - 25.0 / 12.0).abs() < 1e-15);
        assert_eq!(ints.phi(1.5).unwrap(), 0.0);
        let evens = GoodSequence::scaled(2).unwrap();
        assert!((evens.phi(6.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn harmonic_asymptotics_match_direct_sum() {
        for m in [65u64, 100, 1000, 123_457] {
            let direct: f64 = (1..=m).rev().map(|k| 1.0 / k as f64).sum();
            assert!((harmonic(m as f64) - direct).abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn custom_sequence_must_be_good() {
        assert!(GoodSequence::custom(|j| j as f64 * j as f64, 1.0).is_err());
        assert!(GoodSequence::custom(|j| if j == 0 { 1.0 } else { j as f64 }, 1.0).is_err());
        assert!(GoodSequence::custom(|j| j as f64, 0.0).is_err());
    }
}
