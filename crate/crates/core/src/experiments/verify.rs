use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolvedExperiment, Sampler};
use super::identity::CheckResult;
use super::laws::*;
use crate::diagnostics::{assumption_report, AssumptionReport};
use crate::{Error, Result};

pub const REPORT_CSV: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const SUMMARY_TXT: &str = "summary.txt";

/// Everything `verify` produces: the convergence report, the assumption
/// diagnostics on the same grid and the tolerance checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub seed: u64,
    pub report: ConvergenceReport,
    pub assumptions: AssumptionReport,
    pub checks: Vec<CheckResult>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> Result<String> {
        let mut csv = Vec::new();
        self.report.write_csv(&mut csv)?;
        let mut s = format!(
            "seed {}  gamma {}  beta {}{}  target {}\n\n",
            self.seed,
            self.report.gamma,
            self.report.beta,
            if self.report.beta_auto { " (auto)" } else { "" },
            self.report.nlogn_target.map_or("n/a".to_string(), |t| t.to_string()),
        );
        s.push_str(&render_csv_table(csv.as_slice())?);
        s.push('\n');
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{mark} {}: {}\n", c.name, c.detail));
        }
        Ok(s)
    }

    /// Write `report.csv`, `report.json` and `summary.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        self.report.write_csv(&mut csv)?;
        fs::write(dir.join(REPORT_CSV), csv)?;
        fs::write(dir.join(REPORT_JSON), serde_json::to_string_pretty(self)? + "\n")?;
        fs::write(dir.join(SUMMARY_TXT), self.summary()?)?;
        Ok(())
    }
}

/// Render a report CSV as an aligned text table.
pub fn render_csv_table<R: Read>(input: R) -> Result<String> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let mut rows = vec![header];
    for rec in rd.records() {
        rows.push(rec?.iter().map(short_number).collect());
    }
    let cols = rows[0].len();
    let width: Vec<usize> = (0..cols)
        .map(|j| rows.iter().map(|r| r.get(j).map_or(0, |c| c.len())).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, r) in rows.iter().enumerate() {
        let line: Vec<String> = r.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
            out.push('\n');
        }
    }
    Ok(out)
}

fn short_number(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(x) if cell.contains('.') || cell.contains('e') => format!("{x:.6}"),
        _ => cell.to_string(),
    }
}

fn median_of(report: &ConvergenceReport, sampler: Sampler, n: u64, stat: &str) -> Result<f64> {
    report
        .find(sampler, n, stat)
        .map(|r| r.summary.median)
        .ok_or_else(|| Error::Consistency(format!("missing row {stat} at n = {n}")))
}

/// Tolerance checks at the largest grid point, plus the trend of the
/// trimmed-law deviation against the grid point nearest `n_max/100`.
pub fn tolerance_checks(
    res: &ResolvedExperiment,
    report: &ConvergenceReport,
    assumptions: &AssumptionReport,
) -> Result<Vec<CheckResult>> {
    let tol = &res.config.tolerances;
    let grid = &res.config.n_grid;
    let n = res.n_max();
    let reference = grid.iter().copied().rev().find(|&m| m * 100 <= n).unwrap_or(grid[0]);
    let mut samplers: Vec<Sampler> = report.rows.iter().map(|r| r.sampler).collect();
    samplers.dedup();
    let mut checks = Vec::new();
    for s in samplers {
        let tag = |name: &str| format!("{}/{name}", s.name());
        let z = median_of(report, s, n, STAT_TRUNCATED_D_DEV)?;
        checks.push(CheckResult::new(
            &tag("truncated_slln"),
            z <= tol.truncated_d,
            format!("median |Z_n/d_n - 1| = {z:.5} at n = {n} (tolerance {})", tol.truncated_d),
        ));
        let dev = median_of(report, s, n, STAT_TRIMMED_D_DEV)?;
        checks.push(CheckResult::new(
            &tag("trimmed_over_d"),
            dev <= tol.trimmed_d,
            format!("median |S_n^r/d_n - 1| = {dev:.5} at n = {n} (tolerance {})", tol.trimmed_d),
        ));
        if reference < n {
            let early = median_of(report, s, reference, STAT_TRIMMED_D_DEV)?;
            checks.push(CheckResult::new(
                &tag("trimmed_over_d_trend"),
                dev < early,
                format!("median deviation {dev:.5} at n = {n} vs {early:.5} at n = {reference}"),
            ));
        }
        if let Some(target) = res.nlogn_target() {
            let m = median_of(report, s, n, STAT_TRIMMED_NLOGN)?;
            let rel = (m / target - 1.0).abs();
            checks.push(CheckResult::new(
                &tag("trimmed_over_nlogn"),
                rel <= tol.trimmed_nlogn,
                format!(
                    "median S_n^r/(n log n) = {m:.5} vs target {target} (relative error {rel:.4}, tolerance {})",
                    tol.trimmed_nlogn
                ),
            ));
        }
        let u = median_of(report, s, n, STAT_UNTRIMMED_NLOGN)?;
        let [lo, hi] = tol.untrimmed_band;
        checks.push(CheckResult::new(
            &tag("untrimmed_band"),
            lo <= u && u <= hi,
            format!("median S_n/(n log n) = {u:.5}, band [{lo}, {hi}]"),
        ));
    }
    checks.push(CheckResult::new(
        "ratio2_decreasing",
        assumptions.ratio2_decreasing,
        format!("max ratio1 = {:.4}", assumptions.max_ratio1),
    ));
    Ok(checks)
}

/// Simulate, evaluate the assumptions on the same grid and apply the
/// tolerance checks.
pub fn run_verify(config: &ExperimentConfig, workers: usize) -> Result<VerifyOutcome> {
    let res = config.resolve()?;
    let report = run_laws(&res, workers)?;
    let p = &res.config;
    let assumptions = assumption_report(
        &res.model.dist,
        &res.model.seq,
        &res.plan,
        &p.n_grid,
        p.diagnostics.c,
        p.model.plan.eps0,
    )?;
    let checks = tolerance_checks(&res, &report, &assumptions)?;
    Ok(VerifyOutcome {
        seed: p.seed,
        report,
        assumptions,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_verify_writes_three_files() {
        let mut c = ExperimentConfig::default();
        c.n_grid = vec![1_000, 10_000, 100_000];
        c.paths = 4;
        let out = run_verify(&c, 1).unwrap();
        assert!(out.checks.iter().any(|k| k.name == "iid_x/trimmed_over_d_trend"));
        let dir = tempfile::tempdir().unwrap();
        out.write_to(dir.path()).unwrap();
        for f in [REPORT_CSV, REPORT_JSON, SUMMARY_TXT] {
            assert!(dir.path().join(f).is_file());
        }
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(REPORT_JSON)).unwrap()).unwrap();
        assert_eq!(json["seed"], c.seed);
        assert!(json["report"]["config"]["model"]["plan"]["beta"].is_number());
    }

    #[test]
    fn table_rendering() {
        let t = render_csv_table("a,bb\n1.23456789,x\n10,yy\n".as_bytes()).unwrap();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "       a  bb");
        assert_eq!(lines[2], "1.234568   x");
        assert_eq!(lines[3], "      10  yy");
    }
}
