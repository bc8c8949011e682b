//! Simulation and verification laboratory for intermediately trimmed sums of
//! generalized Oppenheim expansions.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the fixed mathematical objects: the good sequence used to
//!   discretize ratios, the distribution function `F`, the digit kernels and
//!   the trimming/truncation plan, together with their exact formulas.
//! * [`sampler`] draws digit chains and the discretized variables with
//!   reproducible counter-based randomness.
//! * [`trimstats`] implements trimmed and truncated sums plus the exact
//!   centering quantities `A_n`, `B̄_n` and `d_n`.
//! * [`diagnostics`] evaluates the concentration bounds and the hypotheses of
//!   the limit theorems numerically.
//! * [`experiments`] runs replicated Monte Carlo paths and aggregates them into
//!   convergence reports.
//! * [`cli`] wires JSON configs to experiments and writes report artifacts.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod sampler;
pub mod trimstats;

pub use error::{Error, Result};
