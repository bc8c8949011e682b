use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolvedExperiment, Sampler};
use super::engine::{simulate_batch, PathBatch};
use super::stats::{summarize, Summary};
use crate::Result;

pub const STAT_TRIMMED_D: &str = "trimmed_over_d";
pub const STAT_TRIMMED_D_DEV: &str = "trimmed_over_d_abs_dev";
pub const STAT_TRIMMED_NLOGN: &str = "trimmed_over_nlogn";
pub const STAT_TRIMMED_NLOGN_DEV: &str = "trimmed_over_nlogn_abs_dev";
pub const STAT_UNTRIMMED_NLOGN: &str = "untrimmed_over_nlogn";
pub const STAT_TRUNCATED_D: &str = "truncated_over_d";
pub const STAT_TRUNCATED_D_DEV: &str = "truncated_over_d_abs_dev";
pub const STAT_EXCEED: &str = "exceed_count";
pub const STAT_GEQ: &str = "geq_count";
pub const STAT_BRACKET: &str = "bracket_gap_over_ell_n";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub sampler: Sampler,
    pub n: u64,
    pub r: u64,
    pub t: f64,
    pub statistic: String,
    #[serde(flatten)]
    pub summary: Summary,
    pub target: Option<f64>,
    pub paths: usize,
}

/// Per `(sampler, n, statistic)` aggregates over paths, with the resolved
/// configuration they came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub seed: u64,
    pub gamma: f64,
    pub beta: f64,
    pub beta_auto: bool,
    pub alpha: Option<f64>,
    /// `αγ`, the limit of `S_n^r/(n log n)`.
    pub nlogn_target: Option<f64>,
    pub config: ExperimentConfig,
    pub rows: Vec<StatRow>,
}

impl ConvergenceReport {
    pub fn new(res: &ResolvedExperiment) -> Self {
        ConvergenceReport {
            seed: res.config.seed,
            gamma: res.gamma(),
            beta: res.beta(),
            beta_auto: res.beta_auto,
            alpha: res.model.dist.alpha(),
            nlogn_target: res.nlogn_target(),
            config: res.config.clone(),
            rows: Vec::new(),
        }
    }

    pub fn find(&self, sampler: Sampler, n: u64, statistic: &str) -> Option<&StatRow> {
        self.rows
            .iter()
            .find(|r| r.sampler == sampler && r.n == n && r.statistic == statistic)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record([
            "sampler", "n", "r", "t", "statistic", "mean", "median", "sd", "min", "max", "target",
            "paths", "gamma", "beta", "seed",
        ])?;
        for row in &self.rows {
            let s = &row.summary;
            w.write_record([
                row.sampler.name().to_string(),
                row.n.to_string(),
                row.r.to_string(),
                row.t.to_string(),
                row.statistic.clone(),
                s.mean.to_string(),
                s.median.to_string(),
                s.sd.to_string(),
                s.min.to_string(),
                s.max.to_string(),
                row.target.map(|t| t.to_string()).unwrap_or_default(),
                row.paths.to_string(),
                self.gamma.to_string(),
                self.beta.to_string(),
                self.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn push(
    rows: &mut Vec<StatRow>,
    batch: &PathBatch,
    g: usize,
    statistic: &str,
    target: Option<f64>,
    values: Vec<f64>,
) {
    let gp = &batch.grid[g];
    rows.push(StatRow {
        sampler: batch.sampler,
        n: gp.n,
        r: gp.r,
        t: gp.t,
        statistic: statistic.to_string(),
        summary: summarize(&values),
        target,
        paths: values.len(),
    });
}

/// Rows for `S_n^r/d_n`, `S_n^r/(n log n)`, `S_n/(n log n)` and the
/// exceedance counts.
pub fn trimmed_rows(res: &ResolvedExperiment, batch: &PathBatch) -> Vec<StatRow> {
    let target = res.nlogn_target();
    let mut rows = Vec::new();
    for (g, gp) in batch.grid.iter().enumerate() {
        let d = gp.moments.d;
        let nlogn = gp.n as f64 * (gp.n as f64).ln();
        let over_d = batch.column(g, |p| p.trimmed / d);
        let over_nlogn = batch.column(g, |p| p.trimmed / nlogn);
        push(&mut rows, batch, g, STAT_TRIMMED_D, Some(1.0), over_d.clone());
        push(
            &mut rows,
            batch,
            g,
            STAT_TRIMMED_D_DEV,
            Some(0.0),
            over_d.iter().map(|x| (x - 1.0).abs()).collect(),
        );
        push(&mut rows, batch, g, STAT_TRIMMED_NLOGN, target, over_nlogn.clone());
        if let Some(tg) = target {
            push(
                &mut rows,
                batch,
                g,
                STAT_TRIMMED_NLOGN_DEV,
                Some(0.0),
                over_nlogn.iter().map(|x| (x - tg).abs()).collect(),
            );
        }
        push(
            &mut rows,
            batch,
            g,
            STAT_UNTRIMMED_NLOGN,
            Some(1.0),
            batch.column(g, |p| p.total / nlogn),
        );
        push(&mut rows, batch, g, STAT_EXCEED, Some(gp.moments.a), batch.column(g, |p| p.exceed as f64));
        push(&mut rows, batch, g, STAT_GEQ, Some(gp.moments.bbar), batch.column(g, |p| p.geq as f64));
        if batch.sampler == Sampler::Chain {
            push(
                &mut rows,
                batch,
                g,
                STAT_BRACKET,
                None,
                batch.column(g, |p| p.bracket_gap.unwrap_or(f64::NAN)),
            );
        }
    }
    rows
}

/// Rows for `Z_n/d_n`.
pub fn truncated_rows(batch: &PathBatch) -> Vec<StatRow> {
    let mut rows = Vec::new();
    for (g, gp) in batch.grid.iter().enumerate() {
        let d = gp.moments.d;
        let over_d = batch.column(g, |p| p.truncated / d);
        push(&mut rows, batch, g, STAT_TRUNCATED_D, Some(1.0), over_d.clone());
        push(
            &mut rows,
            batch,
            g,
            STAT_TRUNCATED_D_DEV,
            Some(0.0),
            over_d.iter().map(|x| (x - 1.0).abs()).collect(),
        );
    }
    rows
}

fn samplers(res: &ResolvedExperiment) -> Vec<Sampler> {
    let mut out = Vec::new();
    if res.config.mode.uses_iid() {
        out.push(Sampler::IidX);
    }
    if res.config.mode.uses_chain() && res.n_max() as usize <= res.config.chain.max_len {
        out.push(Sampler::Chain);
    }
    out
}

/// Simulate once and report both laws; this is what `verify` runs.
pub fn run_laws(res: &ResolvedExperiment, workers: usize) -> Result<ConvergenceReport> {
    let mut report = ConvergenceReport::new(res);
    for sampler in samplers(res) {
        let batch = simulate_batch(res, sampler, workers)?;
        report.rows.extend(trimmed_rows(res, &batch));
        report.rows.extend(truncated_rows(&batch));
    }
    Ok(report)
}

/// `S_n^{r_n}/d_n → 1` and `S_n^{r_n}/(n log n) → αγ`.
pub fn run_trimmed_law(config: &ExperimentConfig, workers: usize) -> Result<ConvergenceReport> {
    let res = config.resolve()?;
    let mut report = ConvergenceReport::new(&res);
    for sampler in samplers(&res) {
        let batch = simulate_batch(&res, sampler, workers)?;
        report.rows.extend(trimmed_rows(&res, &batch));
    }
    Ok(report)
}

/// `Z_n/d_n → 1`.
pub fn run_truncated_slln(config: &ExperimentConfig, workers: usize) -> Result<ConvergenceReport> {
    let res = config.resolve()?;
    let mut report = ConvergenceReport::new(&res);
    for sampler in samplers(&res) {
        let batch = simulate_batch(&res, sampler, workers)?;
        report.rows.extend(truncated_rows(&batch));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.n_grid = vec![1_000, 10_000];
        c.paths = 8;
        c
    }

    #[test]
    fn report_shape_and_csv() {
        let report = run_trimmed_law(&small(), 2).unwrap();
        assert_eq!(report.rows.len(), 2 * 7);
        let row = report.find(Sampler::IidX, 10_000, STAT_TRIMMED_D).unwrap();
        assert!(row.summary.median > 0.8 && row.summary.median < 1.1);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sampler,n,r,t,statistic,"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 1 + report.rows.len());
        let back: ConvergenceReport = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(back.rows.len(), report.rows.len());
    }

    #[test]
    fn single_path_is_well_formed() {
        let mut c = small();
        c.paths = 1;
        let report = run_truncated_slln(&c, 1).unwrap();
        assert_eq!(report.rows.len(), 4);
        for r in &report.rows {
            assert_eq!(r.summary.sd, 0.0);
            assert!(r.summary.median.is_finite());
        }
    }
}
