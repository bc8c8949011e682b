use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::config::ExperimentConfig;
use super::engine::run_indexed;
use crate::model::{digit_mass, digit_tail, DistributionSpec, GoodSequence};
use crate::sampler::{atom_from_uniform, sample_chain, RngStream};
use crate::{Error, Result};

pub const CHAIN_MARGINAL_DOMAIN: &str = "chain-marginal";
pub const IID_MARGINAL_DOMAIN: &str = "iid-marginal";
/// Atoms kept as individual bins by the binned TV distance and the
/// two-sample test; the rest form one tail bin.
pub const LEADING_ATOMS: u64 = 50;
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome {
    Done { statistic: f64, df: usize, p_value: f64, bins: usize },
    Skipped { reason: String },
}

impl TestOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            TestOutcome::Done { p_value, .. } => Some(*p_value),
            TestOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub seed: u64,
    pub n: usize,
    pub paths: usize,
    /// TV distance between the empirical law of `X_n` and `digit_mass`
    /// over the full support.
    pub tv: f64,
    /// The same after lumping atoms beyond [`LEADING_ATOMS`].
    pub tv_binned: f64,
    /// Chi-square test of independence of `(X_n, X_{n+1})`.
    pub lag1: TestOutcome,
    /// Chi-square homogeneity test of chain `X_n` against iid draws.
    pub two_sample: TestOutcome,
}

fn counts(atoms: &[u64]) -> BTreeMap<u64, usize> {
    let mut c = BTreeMap::new();
    for &s in atoms {
        *c.entry(s).or_insert(0) += 1;
    }
    c
}

/// `½ Σ_s |f_s − p_s|` with the unobserved atoms contributing their mass.
pub fn tv_distance(atoms: &[u64], dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    let m = atoms.len() as f64;
    let mut diff = 0.0;
    let mut seen_mass = 0.0;
    for (&s, &k) in &counts(atoms) {
        let p = digit_mass(s, dist, seq)?;
        diff += (k as f64 / m - p).abs();
        seen_mass += p;
    }
    Ok(0.5 * (diff + (1.0 - seen_mass).max(0.0)))
}

/// TV distance on atoms `1..=LEADING_ATOMS` plus one tail bin.
pub fn tv_distance_binned(atoms: &[u64], dist: &DistributionSpec, seq: &GoodSequence) -> Result<f64> {
    let m = atoms.len() as f64;
    let c = counts(atoms);
    let mut diff = 0.0;
    for s in 1..=LEADING_ATOMS {
        let f = *c.get(&s).unwrap_or(&0) as f64 / m;
        diff += (f - digit_mass(s, dist, seq)?).abs();
    }
    let tail_f = c.range(LEADING_ATOMS + 1..).map(|(_, &k)| k).sum::<usize>() as f64 / m;
    diff += (tail_f - digit_tail(LEADING_ATOMS, dist, seq)).abs();
    Ok(0.5 * diff)
}

/// Upper atom of each bin, greedily closing a bin once it carries mass
/// `p_min`; the last bin is open ended.
fn mass_bins(p_min: f64, dist: &DistributionSpec, seq: &GoodSequence) -> Result<Vec<u64>> {
    let mut uppers = Vec::new();
    let mut acc = 0.0;
    let mut s = 1u64;
    while digit_tail(s - 1, dist, seq) >= 2.0 * p_min {
        acc += digit_mass(s, dist, seq)?;
        if acc >= p_min {
            uppers.push(s);
            acc = 0.0;
        }
        s += 1;
    }
    uppers.pop();
    Ok(uppers)
}

fn bin_of(uppers: &[u64], s: u64) -> usize {
    uppers.partition_point(|&u| u < s)
}

/// Pearson test of independence on the binned pairs `(X_n, X_{n+1})`.
pub fn lag1_test(pairs: &[(u64, u64)], dist: &DistributionSpec, seq: &GoodSequence) -> Result<TestOutcome> {
    let m = pairs.len();
    let uppers = mass_bins((2.0 * MIN_EXPECTED / m as f64).sqrt(), dist, seq)?;
    let k = uppers.len() + 1;
    if k < 2 {
        return Ok(TestOutcome::Skipped {
            reason: format!("{m} pairs leave fewer than two bins with expected count >= {MIN_EXPECTED}"),
        });
    }
    let mut table = vec![vec![0usize; k]; k];
    for &(a, b) in pairs {
        table[bin_of(&uppers, a)][bin_of(&uppers, b)] += 1;
    }
    let rows: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..k).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut stat = 0.0;
    for i in 0..k {
        for j in 0..k {
            let e = rows[i] as f64 * cols[j] as f64 / m as f64;
            if e < MIN_EXPECTED {
                return Ok(TestOutcome::Skipped {
                    reason: format!("expected count {e:.2} < {MIN_EXPECTED} in cell ({i}, {j})"),
                });
            }
            stat += (table[i][j] as f64 - e).powi(2) / e;
        }
    }
    chi_square_outcome(stat, (k - 1) * (k - 1), k)
}

fn chi_square_outcome(statistic: f64, df: usize, bins: usize) -> Result<TestOutcome> {
    let chi = ChiSquared::new(df as f64)
        .map_err(|e| Error::Consistency(format!("chi-square with {df} degrees of freedom: {e}")))?;
    Ok(TestOutcome::Done {
        statistic,
        df,
        p_value: chi.sf(statistic),
        bins,
    })
}

/// Pearson homogeneity test between two atom samples on atoms
/// `1..=LEADING_ATOMS` plus a tail bin, merging neighbours until every
/// expected count reaches [`MIN_EXPECTED`].
pub fn two_sample_test(a: &[u64], b: &[u64]) -> Result<TestOutcome> {
    let bin = |s: u64| s.min(LEADING_ATOMS + 1) as usize;
    let mut ca = vec![0usize; LEADING_ATOMS as usize + 2];
    let mut cb = ca.clone();
    a.iter().for_each(|&s| ca[bin(s)] += 1);
    b.iter().for_each(|&s| cb[bin(s)] += 1);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let big_enough = |x: usize, y: usize| {
        let pooled = (x + y) as f64 / (na + nb);
        pooled * na >= MIN_EXPECTED && pooled * nb >= MIN_EXPECTED
    };
    let mut merged: Vec<(usize, usize)> = Vec::new();
    let (mut x, mut y) = (0, 0);
    for i in 0..ca.len() {
        x += ca[i];
        y += cb[i];
        if big_enough(x, y) {
            merged.push((x, y));
            x = 0;
            y = 0;
        }
    }
    if x + y > 0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += x;
                last.1 += y;
            }
            None => merged.push((x, y)),
        }
    }
    if merged.len() < 2 || !merged.iter().all(|&(x, y)| big_enough(x, y)) {
        return Ok(TestOutcome::Skipped {
            reason: format!("samples of {} and {} leave fewer than two usable bins", a.len(), b.len()),
        });
    }
    let mut stat = 0.0;
    for &(x, y) in &merged {
        let pooled = (x + y) as f64 / (na + nb);
        for (obs, size) in [(x, na), (y, nb)] {
            let e = pooled * size;
            stat += (obs as f64 - e).powi(2) / e;
        }
    }
    chi_square_outcome(stat, merged.len() - 1, merged.len())
}

/// Empirical check that chain-generated `X_n` follow `digit_mass` and that
/// consecutive `X_n, X_{n+1}` are independent.
pub fn run_marginal_independence(config: &ExperimentConfig, workers: usize) -> Result<IndependenceReport> {
    if !config.mode.uses_chain() {
        return Err(Error::config("the marginal test needs mode = chain or both"));
    }
    config.validate()?;
    let model = config.model.build()?;
    let n = config.chain.n;
    let m = config.chain.paths;
    let limits = config.chain.limits();
    let seed = config.seed;
    let pairs = run_indexed(workers, m, |i| {
        let mut rng = RngStream::for_domain(seed, CHAIN_MARGINAL_DOMAIN, i as u64);
        let p = sample_chain(&model.family, &model.dist, &model.seq, n + 1, &mut rng, limits)?;
        Ok((p.atoms[n - 1], p.atoms[n]))
    })?;
    let iid = run_indexed(workers, m, |i| {
        let mut rng = RngStream::for_domain(seed, IID_MARGINAL_DOMAIN, i as u64);
        loop {
            match atom_from_uniform(rng.uniform_open(), &model.dist, &model.seq) {
                Err(Error::Resample) => continue,
                other => return other,
            }
        }
    })?;
    let xn: Vec<u64> = pairs.iter().map(|p| p.0).collect();
    Ok(IndependenceReport {
        seed,
        n,
        paths: m,
        tv: tv_distance(&xn, &model.dist, &model.seq)?,
        tv_binned: tv_distance_binned(&xn, &model.dist, &model.seq)?,
        lag1: lag1_test(&pairs, &model.dist, &model.seq)?,
        two_sample: two_sample_test(&xn, &iid)?,
    })
}
