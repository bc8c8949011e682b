use std::io::Write;

use super::config::{ResolvedExperiment, Sampler};
use super::engine::{domain, run_indexed};
use crate::sampler::{sample_chain, sample_iid_x, RngStream};
use crate::Result;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Raw draws of every path up to the largest grid point, on the same streams
/// the experiments use. iid rows are `(path_id, step, x, seed)`; chain rows are
/// `(path_id, step, b, r, x, seed)` with `b = B_step` and `r = R_step`.
pub fn write_dump<W: Write>(res: &ResolvedExperiment, sampler: Sampler, workers: usize, out: W) -> Result<()> {
    let n = res.n_max() as usize;
    let m = &res.model;
    let seed = res.config.seed;
    let limits = res.config.chain.limits();
    let mut w = writer(out);
    match sampler {
        Sampler::IidX => {
            w.write_record(["path_id", "step", "x", "seed"])?;
            let paths = run_indexed(workers, res.config.paths, |i| {
                let mut rng = RngStream::for_domain(seed, domain(sampler), i as u64);
                sample_iid_x(&m.dist, &m.seq, n, &mut rng)
            })?;
            for (i, xs) in paths.iter().enumerate() {
                for (k, x) in xs.iter().enumerate() {
                    w.write_record([i.to_string(), (k + 1).to_string(), x.to_string(), seed.to_string()])?;
                }
            }
        }
        Sampler::Chain => {
            w.write_record(["path_id", "step", "b", "r", "x", "seed"])?;
            let paths = run_indexed(workers, res.config.paths, |i| {
                let mut rng = RngStream::for_domain(seed, domain(sampler), i as u64);
                sample_chain(&m.family, &m.dist, &m.seq, n, &mut rng, limits)
            })?;
            for (i, p) in paths.iter().enumerate() {
                for k in 0..p.len() {
                    w.write_record([
                        i.to_string(),
                        (k + 1).to_string(),
                        p.digits[k].to_string(),
                        p.ratios[k].to_f64().to_string(),
                        p.xs[k].to_string(),
                        seed.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
