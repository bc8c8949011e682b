//! Trimming and truncation arithmetic and the exact centering quantities
//! `A_n`, `B̄_n`, `d_n`.

mod moments;
mod sum;
mod trim;

pub use moments::{
    choose_beta, choose_beta_between, d_lower_bound, exact_a, exact_bbar, exact_d, exact_d_abel,
    exact_d_brute, ExactMoments, D_ORACLE_TOL,
};
pub use sum::{compensated_sum, CompensatedSum};
pub use trim::{
    breakdown, exceed_counts, lemma5_bound_check, residual_identity, sorting_permutation,
    trimmed_indices, trimmed_sum, truncated_sum, BoundCheck, TrimmedSumBreakdown,
    SELECTION_THRESHOLD,
};
