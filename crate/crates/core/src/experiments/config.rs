use serde::{Deserialize, Serialize};

use crate::model::{BetaChoice, Model, ModelConfig, TrimTruncPlan};
use crate::sampler::{ChainLimits, DEFAULT_MAX_CHAIN_LEN, DEFAULT_MAX_DIGIT_BITS};
use crate::trimstats::choose_beta_between;
use crate::{Error, Result};

pub const MAX_GRID_N: u64 = 100_000_000;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    IidX,
    Chain,
    Both,
}

impl Mode {
    pub fn uses_iid(self) -> bool {
        matches!(self, Mode::IidX | Mode::Both)
    }

    pub fn uses_chain(self) -> bool {
        matches!(self, Mode::Chain | Mode::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    IidX,
    Chain,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::IidX => "iid_x",
            Sampler::Chain => "chain",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    /// Index of the digit-ratio variable studied by the marginal test.
    pub n: usize,
    pub paths: usize,
    pub max_len: usize,
    pub max_digit_bits: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n: 5,
            paths: 200_000,
            max_len: DEFAULT_MAX_CHAIN_LEN,
            max_digit_bits: DEFAULT_MAX_DIGIT_BITS,
        }
    }
}

impl ChainConfig {
    pub fn limits(&self) -> ChainLimits {
        ChainLimits {
            max_len: self.max_len,
            max_digit_bits: self.max_digit_bits,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountingConfig {
    pub n_grid: Vec<u64>,
    pub paths: usize,
    pub eps: f64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        CountingConfig {
            n_grid: vec![10_000],
            paths: 1000,
            eps: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// `c` in the summability series.
    pub c: f64,
    /// `ε` in the upper φ bound.
    pub phi_eps: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            c: crate::diagnostics::DEFAULT_SERIES_C,
            phi_eps: 0.1,
        }
    }
}

/// Acceptance bands. These are engineering choices, not derived bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Median `|Z_n/d_n − 1|` at the largest grid point.
    pub truncated_d: f64,
    /// Median `|S_n^r/d_n − 1|` at the largest grid point.
    pub trimmed_d: f64,
    /// Relative band for the median of `S_n^r/(n log n)` around `αγ`.
    pub trimmed_nlogn: f64,
    /// Band for the median of `S_n/(n log n)`.
    pub untrimmed_band: [f64; 2],
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            truncated_d: 0.05,
            trimmed_d: 0.05,
            trimmed_nlogn: 0.15,
            untrimmed_band: [0.8, 1.25],
        }
    }
}

fn default_grid() -> Vec<u64> {
    vec![1_000, 10_000, 100_000, 1_000_000]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default = "default_grid")]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub counting: CountingConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_paths() -> usize {
    50
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_mode() -> Mode {
    Mode::IidX
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig::default(),
            n_grid: default_grid(),
            paths: default_paths(),
            seed: default_seed(),
            mode: default_mode(),
            chain: ChainConfig::default(),
            counting: CountingConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// A validated configuration with `β` fixed.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    /// The input with `plan.beta` replaced by its numeric value.
    pub config: ExperimentConfig,
    pub beta_auto: bool,
    pub model: Model,
    pub plan: TrimTruncPlan,
}

impl ResolvedExperiment {
    pub fn gamma(&self) -> f64 {
        self.plan.gamma()
    }

    pub fn beta(&self) -> f64 {
        self.plan.beta()
    }

    pub fn n_max(&self) -> u64 {
        *self.config.n_grid.last().expect("validated grid")
    }

    /// `αγ`, when `α` is known.
    pub fn nlogn_target(&self) -> Option<f64> {
        self.model.dist.alpha().map(|a| a * self.gamma())
    }
}

fn check_grid(name: &str, grid: &[u64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::config(format!("{name} must not be empty")));
    }
    if grid[0] < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config(format!("{name} must be strictly increasing from n >= 2")));
    }
    if *grid.last().unwrap() > MAX_GRID_N {
        return Err(Error::config(format!("{name} exceeds the cap n <= {MAX_GRID_N}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        check_grid("n_grid", &self.n_grid)?;
        check_grid("counting.n_grid", &self.counting.n_grid)?;
        if self.paths == 0 || self.counting.paths == 0 || self.chain.paths == 0 {
            return Err(Error::config("path counts must be at least 1"));
        }
        let n_max = *self.n_grid.last().unwrap();
        if self.mode == Mode::Chain && n_max as usize > self.chain.max_len {
            return Err(Error::config(format!(
                "mode = chain needs n_grid up to {} at most, got {n_max}",
                self.chain.max_len
            )));
        }
        if self.chain.n == 0 || self.chain.n + 1 > self.chain.max_len {
            return Err(Error::config(format!(
                "chain.n must lie in 1..{}",
                self.chain.max_len
            )));
        }
        if !(self.counting.eps > 0.0) {
            return Err(Error::config("counting.eps must be positive"));
        }
        let t = &self.tolerances;
        if !(t.truncated_d > 0.0 && t.trimmed_d > 0.0 && t.trimmed_nlogn > 0.0)
            || !(t.untrimmed_band[0] < t.untrimmed_band[1])
        {
            return Err(Error::config("tolerances must be positive and the band ordered"));
        }
        Ok(())
    }

    /// Validate, build the model and resolve `β = "auto"` over the grid range.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        self.validate()?;
        let model = self.model.build()?;
        let p = &self.model.plan;
        let (beta, beta_auto) = match p.beta {
            BetaChoice::Value(b) => (b, false),
            BetaChoice::Auto => {
                let lo = self.n_grid[0];
                let hi = *self.n_grid.last().unwrap();
                let b = choose_beta_between(&model.dist, &model.seq, p.gamma, lo, hi, p.eps0, p.margin)?;
                (b, true)
            }
        };
        let plan = TrimTruncPlan::new(p.gamma, beta)?;
        plan.validate_grid(&self.n_grid)?;
        let mut config = self.clone();
        config.model.plan.beta = BetaChoice::Value(beta);
        Ok(ResolvedExperiment {
            config,
            beta_auto,
            model,
            plan,
        })
    }
}
