use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Sampler};
use super::engine::{simulate_batch_in, PathBatch};
use crate::diagnostics::counting_bound;
use crate::Result;

pub const COUNTING_DOMAIN: &str = "counting";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingRow {
    pub n: u64,
    pub t: f64,
    pub a: f64,
    pub eps: f64,
    pub paths: usize,
    /// Fraction of paths with `|#{X_k > t} − A_n| ≥ ε A_n`.
    pub frequency: f64,
    /// `exp(−3ε²A_n/(6 + 4ε))`.
    pub bound: f64,
    /// Number of paths outside `(1 − ε)A_n ≤ count ≤ (1 + ε)A_n`.
    pub sandwich_failures: usize,
    /// Largest `|count − A_n|/A_n` over paths.
    pub max_rel_dev: f64,
}

impl CountingRow {
    pub fn within_bound(&self) -> bool {
        self.frequency <= self.bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingReport {
    pub seed: u64,
    pub rows: Vec<CountingRow>,
}

/// Exceedance-count concentration for every grid point of `batch`.
pub fn counting_rows(batch: &PathBatch, eps: f64) -> Result<Vec<CountingRow>> {
    batch
        .grid
        .iter()
        .enumerate()
        .map(|(g, gp)| {
            let a = gp.moments.a;
            let counts = batch.column(g, |p| p.exceed as f64);
            let dev: Vec<f64> = counts.iter().map(|c| (c - a).abs()).collect();
            let hits = dev.iter().filter(|&&d| d >= eps * a).count();
            let outside = counts
                .iter()
                .filter(|&&c| c < (1.0 - eps) * a || c > (1.0 + eps) * a)
                .count();
            Ok(CountingRow {
                n: gp.n,
                t: gp.t,
                a,
                eps,
                paths: counts.len(),
                frequency: hits as f64 / counts.len() as f64,
                bound: counting_bound(a, eps)?,
                sandwich_failures: outside,
                max_rel_dev: dev.iter().copied().fold(0.0, f64::max) / a,
            })
        })
        .collect()
}

/// Replicate iid paths over `counting.n_grid` and compare the frequency of
/// large count deviations to the exponential bound.
pub fn run_counting_concentration(
    config: &ExperimentConfig,
    eps: f64,
    workers: usize,
) -> Result<CountingReport> {
    let mut res = config.resolve()?;
    res.config.n_grid = config.counting.n_grid.clone();
    res.config.paths = config.counting.paths;
    let batch = simulate_batch_in(&res, Sampler::IidX, workers, COUNTING_DOMAIN)?;
    Ok(CountingReport {
        seed: config.seed,
        rows: counting_rows(&batch, eps)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_eps_never_fires() {
        let mut c = ExperimentConfig::default();
        c.counting.n_grid = vec![2_000];
        c.counting.paths = 50;
        let rep = run_counting_concentration(&c, 50.0, 1).unwrap();
        assert_eq!(rep.rows[0].frequency, 0.0);
        assert_eq!(rep.rows[0].sandwich_failures, 0);
    }

    #[test]
    fn small_eps_fires_often() {
        let mut c = ExperimentConfig::default();
        c.counting.n_grid = vec![2_000];
        c.counting.paths = 200;
        let rep = run_counting_concentration(&c, 0.01, 1).unwrap();
        assert!(rep.rows[0].frequency > 0.5);
    }
}
