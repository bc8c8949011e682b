//! Command-line front end: loads a JSON config, applies overrides, runs one
//! subcommand and writes its artifacts.
//!
//! Exit codes: [`EXIT_OK`], [`EXIT_CONFIG`] for any error before or while
//! running, [`EXIT_CHECK`] when a tolerance or identity check fails.

mod overrides;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{error::ErrorKind, Parser, Subcommand};
use serde::Serialize;

pub use overrides::{apply_overrides, cartesian, parse_override, parse_sweep_axis, Override};

use crate::diagnostics::{assumption_report, AssumptionReport};
use crate::experiments::{
    render_csv_table, run_identity_suite, run_verify, write_dump, ExperimentConfig, Sampler,
};
use crate::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_CHECK: u8 = 2;

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../../../../configs/default.json");
pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "oppenheim-trim", version, about = "Trimmed-sum strong laws for Oppenheim expansions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config; the shipped default when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Number of replicated paths.
    #[arg(long, global = true, value_name = "M")]
    pub paths: Option<usize>,
    /// Cut the grid at N and make N its last point.
    #[arg(long, global = true, value_name = "N")]
    pub nmax: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, value_name = "K")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Dotted-key override, repeatable. For `sweep`, comma lists span the grid.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump raw draws of every path.
    Simulate,
    /// Run both laws and the assumption diagnostics, then apply the tolerances.
    Verify,
    /// `verify` over the cartesian product of the `--set` lists.
    Sweep,
    /// Deterministic identity and oracle suite.
    IdentityCheck,
    /// Assumption diagnostics only.
    Diagnostics,
    /// Render a report CSV as a text table.
    Report {
        #[arg(value_name = "CSV")]
        csv: PathBuf,
    },
}

impl Cli {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }

    fn base_config(&self) -> Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => fs::read_to_string(p)
                .map_err(|e| Error::config(format!("cannot read config {}: {e}", p.display())))?,
            None => DEFAULT_CONFIG.to_string(),
        };
        ExperimentConfig::from_json(&text)
    }

    fn apply_flags(&self, mut c: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(m) = self.paths {
            c.paths = m;
        }
        if let Some(n) = self.nmax {
            c.n_grid.retain(|&g| g < n);
            c.n_grid.push(n);
        }
        c.validate()?;
        Ok(c)
    }

    /// File, then `--set` overrides, then the dedicated flags.
    pub fn load_config(&self) -> Result<ExperimentConfig> {
        let sets = self
            .set
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>>>()?;
        self.apply_flags(apply_overrides(&self.base_config()?, &sets)?)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn simulate(cli: &Cli) -> Result<u8> {
    let res = cli.load_config()?.resolve()?;
    let dir = cli.out_dir();
    fs::create_dir_all(&dir)?;
    let mut samplers = Vec::new();
    if res.config.mode.uses_iid() {
        samplers.push(Sampler::IidX);
    }
    if res.config.mode.uses_chain() {
        if res.n_max() as usize <= res.config.chain.max_len {
            samplers.push(Sampler::Chain);
        } else {
            eprintln!(
                "note: chain dump skipped, n = {} exceeds chain.max_len = {}",
                res.n_max(),
                res.config.chain.max_len
            );
        }
    }
    for s in samplers {
        let path = dir.join(format!("samples_{}.csv", s.name()));
        let file = std::io::BufWriter::new(fs::File::create(&path)?);
        write_dump(&res, s, cli.workers(), file)?;
        println!("wrote {}", path.display());
    }
    write_json(&dir.join("config.json"), &res.config)?;
    Ok(EXIT_OK)
}

fn verify_into(cli: &Cli, config: &ExperimentConfig, dir: &Path) -> Result<bool> {
    let outcome = run_verify(config, cli.workers())?;
    outcome.write_to(dir)?;
    print!("{}", outcome.summary()?);
    Ok(outcome.passed())
}

fn verify(cli: &Cli) -> Result<u8> {
    let config = cli.load_config()?;
    let ok = verify_into(cli, &config, &cli.out_dir())?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK })
}

fn sweep_label(combo: &[Override]) -> String {
    let label = combo
        .iter()
        .map(|o| {
            let key = o.key.rsplit('.').next().unwrap_or(&o.key);
            let v = match &o.value {
                serde_json::Value::String(s) => s.clone(),
                v => v.to_string(),
            };
            format!("{key}={v}")
        })
        .collect::<Vec<_>>()
        .join("_");
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "=._-".contains(c) { c } else { '-' })
        .collect();
    if clean.is_empty() {
        "base".to_string()
    } else {
        clean
    }
}

#[derive(Serialize)]
struct SweepEntry {
    dir: String,
    gamma: f64,
    target: Option<f64>,
    passed: bool,
}

fn sweep(cli: &Cli) -> Result<u8> {
    let axes = cli
        .set
        .iter()
        .map(|s| parse_sweep_axis(s))
        .collect::<Result<Vec<_>>>()?;
    let base = cli.base_config()?;
    let combos = cartesian(&axes);
    let configs = combos
        .iter()
        .map(|c| cli.apply_flags(apply_overrides(&base, c)?))
        .collect::<Result<Vec<_>>>()?;
    let root = cli.out_dir();
    fs::create_dir_all(&root)?;
    let mut index = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(root.join("sweep.csv"))?;
    let mut all_ok = true;
    for (combo, config) in combos.iter().zip(&configs) {
        let label = sweep_label(combo);
        println!("== {label}");
        let ok = verify_into(cli, config, &root.join(&label))?;
        all_ok &= ok;
        let res = config.resolve()?;
        index.serialize(SweepEntry {
            dir: label,
            gamma: res.gamma(),
            target: res.nlogn_target(),
            passed: ok,
        })?;
    }
    index.flush()?;
    Ok(if all_ok { EXIT_OK } else { EXIT_CHECK })
}

fn identity_check(cli: &Cli) -> Result<u8> {
    let report = run_identity_suite()?;
    print!("{}", report.render());
    let dir = cli.out_dir();
    fs::create_dir_all(&dir)?;
    write_json(&dir.join("identity.json"), &report)?;
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_CHECK })
}

#[derive(Serialize)]
struct DiagnosticsOutput<'a> {
    seed: u64,
    config: &'a ExperimentConfig,
    assumptions: AssumptionReport,
}

fn diagnostics(cli: &Cli) -> Result<u8> {
    let res = cli.load_config()?.resolve()?;
    let p = &res.config;
    let rep = assumption_report(
        &res.model.dist,
        &res.model.seq,
        &res.plan,
        &p.n_grid,
        p.diagnostics.c,
        p.model.plan.eps0,
    )?;
    let dir = cli.out_dir();
    fs::create_dir_all(&dir)?;
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in &rep.rows {
        csv.serialize(row)?;
    }
    let csv = csv
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    fs::write(dir.join("assumptions.csv"), &csv)?;
    print!("{}", render_csv_table(csv.as_slice())?);
    println!(
        "seed {}  beta {}  max ratio1 {:.4}  ratio2 decreasing {}",
        p.seed,
        res.beta(),
        rep.max_ratio1,
        rep.ratio2_decreasing
    );
    write_json(
        &dir.join("assumptions.json"),
        &DiagnosticsOutput {
            seed: p.seed,
            config: p,
            assumptions: rep,
        },
    )?;
    Ok(EXIT_OK)
}

fn report(cli: &Cli, csv: &Path) -> Result<u8> {
    let file = fs::File::open(csv)
        .map_err(|e| Error::config(format!("cannot read report {}: {e}", csv.display())))?;
    let table = render_csv_table(file)?;
    print!("{table}");
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.txt"), &table)?;
    }
    Ok(EXIT_OK)
}

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Simulate => simulate(cli),
        Command::Verify => verify(cli),
        Command::Sweep => sweep(cli),
        Command::IdentityCheck => identity_check(cli),
        Command::Diagnostics => diagnostics(cli),
        Command::Report { csv } => report(cli, csv),
    }
}

/// Parse `args` (program name first), run and return the exit code.
pub fn main<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
