use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

const BISECTION_MAX_ITER: u32 = 200;

type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Cdf {
    /// `F(x) = x`.
    Identity,
    /// `F(x) = x(1 + x)/2`.
    Quadratic,
    /// `F(x) = Σ_k c_k x^k` with `c_0 = 0`, nonnegative coefficients summing to 1.
    Polynomial(Vec<f64>),
    Custom(CdfFn),
}

/// A distribution function on `[0, 1]` with `F(0) = 0`, `F(1) = 1`, plus the
/// density-ratio constants `C₁ ≤ F(x)/x ≤ C₂` and, when it exists,
/// `α = lim_{x→0} F(x)/x`.
#[derive(Clone)]
pub struct DistributionSpec {
    cdf: Cdf,
    c1: f64,
    c2: f64,
    alpha: Option<f64>,
}

impl fmt::Debug for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionSpec")
            .field("kind", &self.kind_name())
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl DistributionSpec {
    pub fn identity() -> Self {
        DistributionSpec {
            cdf: Cdf::Identity,
            c1: 1.0,
            c2: 1.0,
            alpha: Some(1.0),
        }
    }

    pub fn quadratic() -> Self {
        DistributionSpec {
            cdf: Cdf::Quadratic,
            c1: 0.5,
            c2: 1.0,
            alpha: Some(0.5),
        }
    }

    /// `F(x) = Σ_{k≥1} coeffs[k−1] · x^k`. Coefficients must be nonnegative
    /// with a positive linear term and sum to 1; then `F(x)/x` rises from
    /// `c_1` at 0 to 1 at 1, so `C₁ = α = c_1` and `C₂ = 1`.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::input("polynomial distribution needs coefficients"));
        }
        if coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::input("polynomial coefficients must be finite and >= 0"));
        }
        if coeffs[0] <= 0.0 {
            return Err(Error::input("polynomial needs a positive linear coefficient"));
        }
        let total: f64 = coeffs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::input(format!("polynomial coefficients sum to {total}, not 1")));
        }
        let c1 = coeffs[0];
        Ok(DistributionSpec {
            cdf: Cdf::Polynomial(coeffs.to_vec()),
            c1,
            c2: 1.0,
            alpha: Some(c1),
        })
    }

    /// A user distribution function; the inverse is computed by bisection.
    /// Use [`DistributionSpec::check_grid`] to verify the stated constants.
    pub fn custom<F>(cdf: F, c1: f64, c2: f64, alpha: Option<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
            return Err(Error::input(format!("need 0 < C1 <= C2, got C1 = {c1}, C2 = {c2}")));
        }
        let spec = DistributionSpec {
            cdf: Cdf::Custom(Arc::new(cdf)),
            c1,
            c2,
            alpha,
        };
        spec.check_grid(1024)?;
        Ok(spec)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.cdf {
            Cdf::Identity => "identity",
            Cdf::Quadratic => "quadratic",
            Cdf::Polynomial(_) => "polynomial",
            Cdf::Custom(_) => "custom",
        }
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// `F(x)`, clamped to `F(x) = 1` for `x ≥ 1` (this covers the
    /// `F(1/0) = 1` convention).
    pub fn cdf(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        if x <= 0.0 {
            return 0.0;
        }
        self.raw_cdf(x)
    }

    /// `F⁻¹(p)` for `p ∈ [0, 1]`.
    pub fn inverse(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        match &self.cdf {
            Cdf::Identity => p,
            // root of x² + x − 2p, rationalised to avoid cancellation near 0
            Cdf::Quadratic => 4.0 * p / (1.0 + (1.0 + 8.0 * p).sqrt()),
            _ => self.bisect(p),
        }
    }

    /// Whether `inverse` is a closed form rather than a numerical search.
    pub fn has_exact_inverse(&self) -> bool {
        matches!(self.cdf, Cdf::Identity | Cdf::Quadratic)
    }

    fn bisect(&self, p: f64) -> f64 {
        // F(x) ≥ C₁x and F(x) ≤ C₂x bracket the root.
        let mut lo = (p / self.c2).clamp(0.0, 1.0);
        let mut hi = (p / self.c1).clamp(0.0, 1.0);
        if self.cdf(lo) > p {
            lo = 0.0;
        }
        if self.cdf(hi) < p {
            hi = 1.0;
        }
        for _ in 0..BISECTION_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Check `F(0) = 0`, `F(1) = 1`, monotonicity and `C₁ ≤ F(x)/x ≤ C₂` on a
    /// grid of `points` nodes uniformly and geometrically spaced in `(0, 1]`.
    pub fn check_grid(&self, points: usize) -> Result<()> {
        let f0 = self.raw_cdf(0.0);
        let f1 = self.raw_cdf(1.0);
        if f0.abs() > 1e-15 || (f1 - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("need F(0) = 0 and F(1) = 1, got {f0} and {f1}")));
        }
        let points = points.max(2);
        let mut grid: Vec<f64> = (1..=points).map(|i| i as f64 / points as f64).collect();
        grid.extend((1..points).map(|i| 10f64.powf(-12.0 * i as f64 / points as f64)));
        grid.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for &x in &grid {
            let fx = self.raw_cdf(x);
            if fx < prev {
                return Err(Error::Model(format!("F decreases at x = {x}")));
            }
            let ratio = fx / x;
            if ratio < self.c1 * (1.0 - 1e-12) || ratio > self.c2 * (1.0 + 1e-12) {
                return Err(Error::Model(format!(
                    "F(x)/x = {ratio} at x = {x} escapes [{}, {}]",
                    self.c1, self.c2
                )));
            }
            prev = fx;
        }
        Ok(())
    }

    // F without the clamping in `cdf`, for validation.
    fn raw_cdf(&self, x: f64) -> f64 {
        match &self.cdf {
            Cdf::Identity => x,
            Cdf::Quadratic => 0.5 * x * (1.0 + x),
            Cdf::Polynomial(c) => x * c.iter().rev().fold(0.0, |acc, ck| acc * x + ck),
            Cdf::Custom(f) => f(x),
        }
    }
}
