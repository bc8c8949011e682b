use serde::{Deserialize, Serialize};

use crate::model::GoodSequence;
use crate::{Error, Result};

/// How far the search for `U₀` extends beyond the supplied grid.
pub const PHI_SEARCH_LIMIT: f64 = 1e60;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiBoundsReport {
    pub eps: f64,
    pub points: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub lower_violations: usize,
    /// Smallest `φ(u) − (log u − log λ₁ − ℓ)` over the grid.
    pub min_lower_slack: f64,
    pub upper_violations: usize,
    /// Smallest grid point past which `φ(u) ≤ (1 + ε)(log u − log λ₁)` holds
    /// at every later point, on the supplied grid extended geometrically up
    /// to [`PHI_SEARCH_LIMIT`]. `None` if it never settles.
    pub u0: Option<f64>,
    /// Whether `u0` lies inside the supplied grid.
    pub u0_on_grid: bool,
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn bounds(seq: &GoodSequence, u: f64, eps: f64) -> Result<(f64, f64, f64)> {
    let log_rel = u.ln() - seq.lambda(1).ln();
    Ok((seq.phi(u)?, log_rel - seq.ell(), (1.0 + eps) * log_rel))
}

/// Check `log u − log λ₁ − ℓ ≤ φ(u)` on every grid point and locate `U₀` for
/// `φ(u) ≤ (1 + ε)(log u − log λ₁)`.
pub fn phi_bounds_check(seq: &GoodSequence, u_grid: &[f64], eps: f64) -> Result<PhiBoundsReport> {
    if !(eps > 0.0) {
        return Err(Error::input(format!("eps must be positive, got {eps}")));
    }
    if u_grid.is_empty() {
        return Err(Error::input("phi_bounds_check needs a non-empty grid"));
    }
    let lam2 = seq.lambda(2);
    if let Some(u) = u_grid.iter().find(|&&u| !(u >= lam2 && u.is_finite())) {
        return Err(Error::input(format!("grid point {u} is below lambda_2 = {lam2}")));
    }
    let mut grid = u_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut lower_violations = 0;
    let mut min_lower_slack = f64::INFINITY;
    let mut upper_ok = Vec::with_capacity(grid.len());
    let mut first_bad = None;
    for &u in &grid {
        let (phi, lower, upper) = bounds(seq, u, eps)?;
        let slack = phi - lower;
        min_lower_slack = min_lower_slack.min(slack);
        if slack < 0.0 {
            lower_violations += 1;
            first_bad.get_or_insert(u);
        }
        upper_ok.push(phi <= upper);
    }
    if let Some(u) = first_bad {
        return Err(Error::Model(format!(
            "phi lower bound fails at u = {u} ({lower_violations} violations); not a good sequence?"
        )));
    }
    let upper_violations = upper_ok.iter().filter(|ok| !**ok).count();
    let u_max = *grid.last().unwrap();
    let settled_from = upper_ok.iter().rposition(|ok| !ok).map_or(0, |i| i + 1);
    let (u0, u0_on_grid) = if settled_from < grid.len() {
        (Some(grid[settled_from]), true)
    } else {
        (search_u0(seq, u_max, eps)?, false)
    };
    Ok(PhiBoundsReport {
        eps,
        points: grid.len(),
        u_min: grid[0],
        u_max,
        lower_violations,
        min_lower_slack,
        upper_violations,
        u0,
        u0_on_grid,
    })
}

fn search_u0(seq: &GoodSequence, from: f64, eps: f64) -> Result<Option<f64>> {
    // 100 points per decade; keep the last failure and report the point after it
    let decades = (PHI_SEARCH_LIMIT / from).log10().max(0.0);
    let ext = log_grid(from, PHI_SEARCH_LIMIT, (decades * 100.0).ceil() as usize + 1);
    let mut candidate = None;
    for &u in &ext {
        let (phi, _, upper) = bounds(seq, u, eps)?;
        if phi > upper {
            candidate = None;
        } else if candidate.is_none() {
            candidate = Some(u);
        }
    }
    Ok(candidate)
}
