use crate::{Error, Result};

/// `2·exp(−t²/(2·Var Z + (2/3)·M·t))` for a centred sum of terms bounded
/// by `M`.
pub fn bernstein_tail(t: f64, m: f64, var_z: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("bernstein_tail needs t > 0, got {t}")));
    }
    if !(m >= 0.0 && var_z >= 0.0) {
        return Err(Error::Domain(format!("need M >= 0 and Var >= 0, got {m} and {var_z}")));
    }
    let denom = 2.0 * var_z + 2.0 / 3.0 * m * t;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * (-t * t / denom).exp())
}

/// `exp(−3ε²A/(6 + 4ε))`, the bound on `P(|#{X_k > t} − A| ≥ εA)` used for
/// the exceedance counts.
pub fn counting_bound(a: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && a >= 0.0) {
        return Err(Error::Domain(format!("need eps > 0 and A >= 0, got {eps} and {a}")));
    }
    Ok((-3.0 * eps * eps * a / (6.0 + 4.0 * eps)).exp())
}
