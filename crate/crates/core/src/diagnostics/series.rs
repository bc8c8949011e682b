use crate::model::{digit_tail, truncation_level, DistributionSpec, GoodSequence};
use crate::trimstats::exact_d;
use crate::Result;

/// `(t_n, A_n, d_n)` for consecutive `n`, reusing the per-unit values on each
/// run of `n` that shares `j_{t_n}`.
pub(crate) struct MomentWalker<'a> {
    dist: &'a DistributionSpec,
    seq: &'a GoodSequence,
    gamma: f64,
    cell: Option<(u64, f64, f64)>,
}

impl<'a> MomentWalker<'a> {
    pub(crate) fn new(dist: &'a DistributionSpec, seq: &'a GoodSequence, gamma: f64) -> Self {
        MomentWalker {
            dist,
            seq,
            gamma,
            cell: None,
        }
    }

    pub(crate) fn at(&mut self, n: u64) -> Result<(f64, f64, f64)> {
        let t = truncation_level(n, self.gamma);
        let j = self.seq.index_above(t)?;
        let (a1, d1) = match self.cell {
            Some((cj, a1, d1)) if cj == j => (a1, d1),
            _ => {
                let a1 = digit_tail(j - 1, self.dist, self.seq);
                let d1 = exact_d(1, t, self.dist, self.seq)?;
                self.cell = Some((j, a1, d1));
                (a1, d1)
            }
        };
        Ok((t, n as f64 * a1, n as f64 * d1))
    }
}
