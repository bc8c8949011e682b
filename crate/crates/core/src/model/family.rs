use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// User hook for a generalized Oppenheim kernel.
///
/// `phi` must be positive on admissible digits and `y` nonnegative. Exact
/// rationals keep the digit recursion free of rounding even once the digits
/// have hundreds of decimal places.
pub trait DigitKernel: Send + Sync {
    /// `φ_step(digit)`.
    fn phi(&self, step: usize, digit: &BigUint) -> BigRational;

    /// `y_step(h_1, …, h_step)`; `history` holds `B_1..=B_step`.
    fn y(&self, _step: usize, _history: &[BigUint]) -> BigRational {
        BigRational::zero()
    }

    fn min_first_digit(&self) -> BigUint {
        BigUint::one()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// `φ(h) = h`, `y ≡ 0`, `h_1 ≥ 1`.
    Engel,
    /// `φ(h) = h(h − 1)`, `y ≡ 0`, `h_1 ≥ 2`.
    LurothType,
    Custom,
}

/// The kernels `φ_n`, `y_n` that define the digit chain `B_n` and the
/// ratios `R_n = 1/δ_n(B_n, B_{n+1}, Y_n)`.
#[derive(Clone)]
pub struct ExpansionFamily {
    kind: FamilyKind,
    custom: Option<Arc<dyn DigitKernel>>,
}

impl fmt::Debug for ExpansionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExpansionFamily").field("kind", &self.kind).finish()
    }
}

impl ExpansionFamily {
    pub fn engel() -> Self {
        ExpansionFamily {
            kind: FamilyKind::Engel,
            custom: None,
        }
    }

    pub fn luroth_type() -> Self {
        ExpansionFamily {
            kind: FamilyKind::LurothType,
            custom: None,
        }
    }

    pub fn custom(kernel: impl DigitKernel + 'static) -> Self {
        ExpansionFamily {
            kind: FamilyKind::Custom,
            custom: Some(Arc::new(kernel)),
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn phi(&self, step: usize, digit: &BigUint) -> BigRational {
        match self.kind {
            FamilyKind::Engel => big_rational(digit.clone()),
            FamilyKind::LurothType => {
                let h = digit.clone();
                let prod = if h.is_zero() { BigUint::zero() } else { &h * (&h - 1u32) };
                big_rational(prod)
            }
            FamilyKind::Custom => self.kernel().phi(step, digit),
        }
    }

    pub fn y(&self, step: usize, history: &[BigUint]) -> BigRational {
        match self.kind {
            FamilyKind::Engel | FamilyKind::LurothType => BigRational::zero(),
            FamilyKind::Custom => self.kernel().y(step, history),
        }
    }

    pub fn min_first_digit(&self) -> BigUint {
        match self.kind {
            FamilyKind::Engel => BigUint::one(),
            FamilyKind::LurothType => BigUint::from(2u32),
            FamilyKind::Custom => self.kernel().min_first_digit(),
        }
    }

    /// Whether `y ≡ 0` and `φ` is integer valued, so the independence
    /// hypothesis on the digits holds for every integer good sequence.
    pub fn is_integral_builtin(&self) -> bool {
        matches!(self.kind, FamilyKind::Engel | FamilyKind::LurothType)
    }

    fn kernel(&self) -> &dyn DigitKernel {
        self.custom
            .as_deref()
            .expect("custom family always carries a kernel")
    }

    /// Smallest admissible successor of `digit` at `step`: `⌈φ_step(digit)⌉`.
    pub fn min_successor(&self, step: usize, digit: &BigUint) -> BigUint {
        ceil_to_biguint(&self.phi(step, digit))
    }

    /// Check `x·φ_n(h) + (x − 1)·y·φ_n(h) ∈ ℤ` for every `x` in `lambdas` and
    /// every digit in `digits` at `step`. Exact for built-ins; for custom
    /// kernels this only covers the supplied finite sample.
    pub fn check_integrality(
        &self,
        step: usize,
        history: &[BigUint],
        digits: &[BigUint],
        lambdas: &[u64],
    ) -> Result<()> {
        let y = self.y(step, history);
        for h in digits {
            let phi = self.phi(step, h);
            if phi <= BigRational::zero() {
                return Err(Error::Model(format!("phi_{step}({h}) is not positive")));
            }
            for &x in lambdas {
                let x = BigRational::from_integer(BigInt::from(x));
                let value = &x * &phi + (&x - BigRational::one()) * &y * &phi;
                if !value.is_integer() {
                    return Err(Error::Model(format!(
                        "x*phi + (x-1)*y*phi = {value} is not an integer (x = {x}, h = {h})"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn big_rational(n: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Nonnegative `⌈q⌉` as a `BigUint` (negatives clamp to zero).
pub(crate) fn ceil_to_biguint(q: &BigRational) -> BigUint {
    q.ceil().to_integer().to_biguint().unwrap_or_default()
}
