use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::sum::CompensatedSum;
use crate::{Error, Result};

/// Below this length the r-th largest value is found by sorting; above it by
/// selection.
pub const SELECTION_THRESHOLD: usize = 100_000;

/// Every sum derived from one `(values, r, t)` triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimmedSumBreakdown {
    pub n: usize,
    pub r: usize,
    pub t: f64,
    pub total: f64,
    /// `S_n^r`: the sum without the `r` largest values.
    pub trimmed_sum: f64,
    /// `Z_n = Σ X_k 1{X_k ≤ t}`.
    pub truncated_sum: f64,
    /// `ℓ_n = #{k: X_k > t}`.
    pub exceed_count: usize,
    /// `#{k: X_k ≥ t}`.
    pub geq_count: usize,
    pub top_r_sum: f64,
    /// `Σ X_k 1{X_k > t}`.
    pub over_threshold_sum: f64,
}

impl TrimmedSumBreakdown {
    /// `Z_n − S_n^r`.
    pub fn residual(&self) -> f64 {
        self.truncated_sum - self.trimmed_sum
    }
}

/// Order used for `σ`: larger values first, equal values by original index.
fn sigma_order(values: &[f64], a: usize, b: usize) -> Ordering {
    values[b].total_cmp(&values[a]).then(a.cmp(&b))
}

/// The sorting permutation `σ`: `values[σ[0]] ≥ values[σ[1]] ≥ …`, ties broken
/// by ascending original index.
pub fn sorting_permutation(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| sigma_order(values, a, b));
    idx
}

/// Indices `σ(1..=r)` of the removed elements, in σ order.
pub fn trimmed_indices(values: &[f64], r: usize) -> Result<Vec<usize>> {
    check_r(values.len(), r)?;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if r > 0 && r < idx.len() {
        idx.select_nth_unstable_by(r - 1, |&a, &b| sigma_order(values, a, b));
    }
    idx.truncate(r);
    idx.sort_by(|&a, &b| sigma_order(values, a, b));
    Ok(idx)
}

fn check_r(n: usize, r: usize) -> Result<()> {
    if r > n {
        return Err(Error::input(format!("cannot trim r = {r} of n = {n} values")));
    }
    Ok(())
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::input(format!("value at index {i} is not finite"))),
        None => Ok(()),
    }
}

/// The r-th largest value, by sorting or selection on a copy.
fn rth_largest(values: &[f64], r: usize) -> f64 {
    let mut copy = values.to_vec();
    let desc = |a: &f64, b: &f64| b.total_cmp(a);
    if copy.len() < SELECTION_THRESHOLD {
        copy.sort_unstable_by(desc);
        copy[r - 1]
    } else {
        *copy.select_nth_unstable_by(r - 1, desc).1
    }
}

/// All sums for `values`, trimming `r` and truncating at `t`, in two passes.
///
/// The removed multiset is the same for every tie rule, so the sums only
/// need the r-th largest value `v` and the number of entries above it.
pub fn breakdown(values: &[f64], r: usize, t: f64) -> Result<TrimmedSumBreakdown> {
    let n = values.len();
    check_r(n, r)?;
    check_finite(values)?;
    let v = (r > 0).then(|| rth_largest(values, r));
    let mut total = CompensatedSum::new();
    let mut truncated = CompensatedSum::new();
    let mut over = CompensatedSum::new();
    let mut above_v = CompensatedSum::new();
    let mut below_v = CompensatedSum::new();
    let (mut exceed, mut geq, mut n_above_v, mut n_at_v) = (0usize, 0usize, 0usize, 0usize);
    for &x in values {
        total.add(x);
        if x > t {
            exceed += 1;
            over.add(x);
        } else {
            truncated.add(x);
        }
        if x >= t {
            geq += 1;
        }
        match v {
            Some(v) if x > v => {
                n_above_v += 1;
                above_v.add(x);
            }
            Some(v) if x == v => n_at_v += 1,
            _ => below_v.add(x),
        }
    }
    let (top, trimmed) = match v {
        Some(v) => {
            let taken = (r - n_above_v) as f64;
            let mut top = above_v;
            top.add(taken * v);
            let mut rest = below_v;
            rest.add((n_at_v as f64 - taken) * v);
            (top.value(), rest.value())
        }
        None => (0.0, total.value()),
    };
    Ok(TrimmedSumBreakdown {
        n,
        r,
        t,
        total: total.value(),
        trimmed_sum: trimmed,
        truncated_sum: truncated.value(),
        exceed_count: exceed,
        geq_count: geq,
        top_r_sum: top,
        over_threshold_sum: over.value(),
    })
}

/// `S_n^r`: the sum after removing exactly `r` maximal elements.
pub fn trimmed_sum(values: &[f64], r: usize) -> Result<f64> {
    Ok(breakdown(values, r, f64::INFINITY)?.trimmed_sum)
}

/// `Z_n = Σ X_k 1{X_k ≤ t}`.
pub fn truncated_sum(values: &[f64], t: f64) -> f64 {
    values
        .iter()
        .copied()
        .filter(|&x| x <= t)
        .collect::<CompensatedSum>()
        .value()
}

/// `(#{X_k > t}, #{X_k ≥ t})`.
pub fn exceed_counts(values: &[f64], t: f64) -> (usize, usize) {
    values.iter().fold((0, 0), |(gt, ge), &x| {
        (gt + usize::from(x > t), ge + usize::from(x >= t))
    })
}

/// Both sides of `Z_n − S_n^r = Σ_{k≤r} X_{σ(k)} − Σ X_k 1{X_k > t}`.
pub fn residual_identity(values: &[f64], r: usize, t: f64) -> Result<(f64, f64)> {
    let b = breakdown(values, r, t)?;
    Ok((b.residual(), b.top_r_sum - b.over_threshold_sum))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundCheck {
    Holds { residual: f64, bound: f64 },
    Violated { residual: f64, bound: f64 },
    /// `r < ℓ_n`: the bound is not claimed.
    Skipped { r: usize, exceed_count: usize },
}

impl BoundCheck {
    pub fn holds(&self) -> Option<bool> {
        match self {
            BoundCheck::Holds { .. } => Some(true),
            BoundCheck::Violated { .. } => Some(false),
            BoundCheck::Skipped { .. } => None,
        }
    }
}

/// `Z_n − S_n^r ≤ (r − ℓ_n)·t` whenever `r ≥ ℓ_n`.
pub fn lemma5_bound_check(values: &[f64], r: usize, t: f64) -> Result<BoundCheck> {
    let b = breakdown(values, r, t)?;
    if r < b.exceed_count {
        return Ok(BoundCheck::Skipped {
            r,
            exceed_count: b.exceed_count,
        });
    }
    let residual = b.residual();
    let bound = (r - b.exceed_count) as f64 * t;
    Ok(if residual <= bound {
        BoundCheck::Holds { residual, bound }
    } else {
        BoundCheck::Violated { residual, bound }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted_oracle(values: &[f64], r: usize) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v[r..].iter().sum()
    }

    #[test]
    fn trimmed_sum_examples() {
        assert_eq!(trimmed_sum(&[5.0, 1.0, 3.0], 1).unwrap(), 4.0);
        assert_eq!(trimmed_sum(&[5.0, 1.0, 3.0], 0).unwrap(), 9.0);
        assert_eq!(trimmed_sum(&[2.0, 2.0, 1.0], 1).unwrap(), 3.0);
        assert_eq!(trimmed_sum(&[2.0, 2.0, 1.0], 3).unwrap(), 0.0);
        assert!(trimmed_sum(&[1.0], 2).is_err());
        assert!(trimmed_sum(&[1.0, f64::NAN], 1).is_err());
    }

    #[test]
    fn tie_rule_removes_lowest_index_first() {
        let v = [2.0, 1.0, 2.0, 2.0];
        assert_eq!(sorting_permutation(&v), vec![0, 2, 3, 1]);
        assert_eq!(trimmed_indices(&v, 2).unwrap(), vec![0, 2]);
    }

    #[test]
    fn truncation_and_counts() {
        let v = [5.0, 1.0, 3.0];
        assert_eq!(truncated_sum(&v, 3.0), 4.0);
        assert_eq!(truncated_sum(&v, 0.5), 0.0);
        assert_eq!(truncated_sum(&v, 10.0), 9.0);
        assert_eq!(exceed_counts(&v, 3.0), (1, 2));
        assert_eq!(exceed_counts(&[], 1.0), (0, 0));
    }

    #[test]
    fn identity_examples() {
        assert_eq!(residual_identity(&[5.0, 1.0, 3.0], 1, 3.0).unwrap(), (0.0, 0.0));
        assert_eq!(residual_identity(&[5.0, 4.0, 1.0], 2, 3.0).unwrap(), (0.0, 0.0));
        assert_eq!(residual_identity(&[1.0, 2.0], 0, 3.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn bound_examples() {
        let check = lemma5_bound_check(&[5.0, 4.0, 1.0], 2, 3.0).unwrap();
        assert_eq!(check, BoundCheck::Holds { residual: 0.0, bound: 0.0 });
        let check = lemma5_bound_check(&[5.0, 1.0, 2.0], 2, 3.0).unwrap();
        assert_eq!(check, BoundCheck::Holds { residual: 2.0, bound: 3.0 });
        let check = lemma5_bound_check(&[1.0, 2.0, 3.0], 3, 3.0).unwrap();
        assert_eq!(check.holds(), Some(true));
        let check = lemma5_bound_check(&[5.0, 4.0, 1.0], 1, 3.0).unwrap();
        assert_eq!(check, BoundCheck::Skipped { r: 1, exceed_count: 2 });
    }

    #[test]
    fn selection_path_matches_sorting() {
        let mut rng = crate::sampler::RngStream::new(1, 2);
        let n = SELECTION_THRESHOLD + 17;
        let v: Vec<f64> = (0..n)
            .map(|_| (1.0 / rng.uniform_open()).floor())
            .collect();
        for r in [1, 10, 777, n / 2] {
            let b = breakdown(&v, r, 50.0).unwrap();
            let idx = trimmed_indices(&v, r).unwrap();
            let top: f64 = idx.iter().map(|&i| v[i]).sum();
            assert_eq!(b.top_r_sum, top);
            assert_eq!(b.trimmed_sum, sorted_oracle(&v, r));
            assert_eq!(b.trimmed_sum, b.total - b.top_r_sum);
        }
    }

    fn heavy_integers() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((1u32..1_000_000).prop_map(|k| (1e6 / k as f64).floor()), 0..300)
    }

    proptest! {
        #[test]
        fn trimmed_sum_equals_sort_oracle(v in heavy_integers(), r_frac in 0.0f64..=1.0) {
            let r = (r_frac * v.len() as f64).round() as usize;
            prop_assert_eq!(trimmed_sum(&v, r).unwrap(), sorted_oracle(&v, r));
        }

        #[test]
        fn identity_is_exact_on_integers(v in heavy_integers(), r_frac in 0.0f64..=1.0, t in 0.5f64..2e3) {
            let r = (r_frac * v.len() as f64).round() as usize;
            let (lhs, rhs) = residual_identity(&v, r, t).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn identity_holds_on_floats(v in prop::collection::vec(0.0f64..1e9, 1..300), r_frac in 0.0f64..=1.0, t in 0.0f64..1e9) {
            let r = (r_frac * v.len() as f64).round() as usize;
            let b = breakdown(&v, r, t).unwrap();
            let (lhs, rhs) = (b.residual(), b.top_r_sum - b.over_threshold_sum);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * b.total.max(1.0));
        }

        #[test]
        fn counts_match_naive_loop(v in heavy_integers(), t in 0.0f64..2e3) {
            let mut gt = 0;
            let mut ge = 0;
            for &x in &v {
                if x > t { gt += 1; }
                if x >= t { ge += 1; }
            }
            prop_assert_eq!(exceed_counts(&v, t), (gt, ge));
        }

        #[test]
        fn bound_never_violated(v in heavy_integers(), t in 1.0f64..2e3, extra in 0usize..20) {
            let (gt, _) = exceed_counts(&v, t);
            let r = (gt + extra).min(v.len());
            let check = lemma5_bound_check(&v, r, t).unwrap();
            prop_assert_ne!(check.holds(), Some(false));
        }
    }
}
