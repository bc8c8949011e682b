use rayon::prelude::*;

use super::config::{ResolvedExperiment, Sampler};
use crate::sampler::{sample_chain, sample_iid_x, RngStream};
use crate::trimstats::{breakdown, trimmed_indices, CompensatedSum, ExactMoments};
use crate::{Error, Result};

/// Default worker count: the machine's available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Run `job(i)` for `i in 0..count` on a pool of `workers` threads and
/// return the results in index order.
pub fn run_indexed<T, F>(workers: usize, count: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let workers = if workers == 0 { default_workers() } else { workers };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&job).collect())
}

/// Plan values and exact moments at one grid point.
#[derive(Clone, Debug)]
pub struct GridPoint {
    pub n: u64,
    pub r: u64,
    pub t: f64,
    pub moments: ExactMoments,
}

/// Per-path sums at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub trimmed: f64,
    pub truncated: f64,
    pub total: f64,
    pub exceed: usize,
    pub geq: usize,
    /// `|Σ_kept R_k − Σ_kept X_k|/(ℓ n)` for chain paths.
    pub bracket_gap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PathBatch {
    pub sampler: Sampler,
    pub grid: Vec<GridPoint>,
    /// `paths[i][g]`: path `i` at grid point `g`.
    pub paths: Vec<Vec<PathPoint>>,
}

impl PathBatch {
    pub fn column(&self, g: usize, f: impl Fn(&PathPoint) -> f64) -> Vec<f64> {
        self.paths.iter().map(|p| f(&p[g])).collect()
    }
}

pub fn grid_points(res: &ResolvedExperiment, grid: &[u64]) -> Result<Vec<GridPoint>> {
    grid.iter()
        .map(|&n| {
            let t = res.plan.t(n);
            Ok(GridPoint {
                n,
                r: res.plan.r(n),
                t,
                moments: ExactMoments::compute(n, t, &res.model.dist, &res.model.seq)?,
            })
        })
        .collect()
}

/// Stream tag per sampler, so the two samplers never share variates.
pub fn domain(sampler: Sampler) -> &'static str {
    sampler.name()
}

fn path_points(
    xs: &[f64],
    ratios: Option<&[f64]>,
    ell: f64,
    grid: &[GridPoint],
) -> Result<Vec<PathPoint>> {
    grid.iter()
        .map(|g| {
            let n = g.n as usize;
            let r = (g.r as usize).min(n);
            let b = breakdown(&xs[..n], r, g.t)?;
            let bracket_gap = match ratios {
                Some(rs) => {
                    let mut removed = vec![false; n];
                    for i in trimmed_indices(&xs[..n], r)? {
                        removed[i] = true;
                    }
                    let mut gap = CompensatedSum::new();
                    for k in (0..n).filter(|&k| !removed[k]) {
                        gap.add(rs[k] - xs[k]);
                    }
                    Some(gap.value().abs() / (ell * n as f64))
                }
                None => None,
            };
            Ok(PathPoint {
                trimmed: b.trimmed_sum,
                truncated: b.truncated_sum,
                total: b.total,
                exceed: b.exceed_count,
                geq: b.geq_count,
                bracket_gap,
            })
        })
        .collect()
}

/// Draw every path once up to the largest grid point and evaluate all grid
/// prefixes. Path `i` uses stream `i` of the sampler's domain, so results do
/// not depend on scheduling.
pub fn simulate_batch(res: &ResolvedExperiment, sampler: Sampler, workers: usize) -> Result<PathBatch> {
    simulate_batch_in(res, sampler, workers, domain(sampler))
}

/// [`simulate_batch`] on the streams of an explicit domain tag.
pub fn simulate_batch_in(
    res: &ResolvedExperiment,
    sampler: Sampler,
    workers: usize,
    domain: &str,
) -> Result<PathBatch> {
    let grid = grid_points(res, &res.config.n_grid)?;
    let n_max = res.n_max() as usize;
    let m = &res.model;
    let seed = res.config.seed;
    let limits = res.config.chain.limits();
    let paths = run_indexed(workers, res.config.paths, |i| {
        let mut rng = RngStream::for_domain(seed, domain, i as u64);
        match sampler {
            Sampler::IidX => {
                let xs = sample_iid_x(&m.dist, &m.seq, n_max, &mut rng)?;
                path_points(&xs, None, m.seq.ell(), &grid)
            }
            Sampler::Chain => {
                let path = sample_chain(&m.family, &m.dist, &m.seq, n_max, &mut rng, limits)?;
                let rs = path.ratios_f64();
                path_points(&path.xs, Some(&rs), m.seq.ell(), &grid)
            }
        }
    })?;
    Ok(PathBatch {
        sampler,
        grid,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentConfig, Mode};

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.n_grid = vec![200, 1000];
        c.paths = 6;
        c
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let res = small().resolve().unwrap();
        let a = simulate_batch(&res, Sampler::IidX, 1).unwrap();
        let b = simulate_batch(&res, Sampler::IidX, 3).unwrap();
        assert_eq!(a.paths, b.paths);
    }

    #[test]
    fn prefixes_are_consistent() {
        let short = small().resolve().unwrap();
        let mut long_cfg = small();
        long_cfg.n_grid = vec![200, 1000, 5000];
        long_cfg.model.plan.beta = crate::model::BetaChoice::Value(short.beta());
        let long = long_cfg.resolve().unwrap();
        let a = simulate_batch(&short, Sampler::IidX, 1).unwrap();
        let b = simulate_batch(&long, Sampler::IidX, 1).unwrap();
        for (pa, pb) in a.paths.iter().zip(&b.paths) {
            assert_eq!(pa[..], pb[..2]);
        }
    }

    #[test]
    fn chain_paths_respect_the_bracket() {
        let mut c = small();
        c.mode = Mode::Chain;
        c.n_grid = vec![100, 400];
        let res = c.resolve().unwrap();
        let batch = simulate_batch(&res, Sampler::Chain, 2).unwrap();
        for p in &batch.paths {
            for pt in p {
                assert!(pt.bracket_gap.unwrap() <= 1.0);
            }
        }
    }
}
