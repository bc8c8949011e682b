//! Monte Carlo checks of the limit theorems over replicated paths.

mod config;
mod counting;
mod dump;
mod engine;
mod identity;
mod independence;
mod laws;
mod stats;
mod verify;

pub use config::{
    ChainConfig, CountingConfig, DiagnosticsConfig, ExperimentConfig, Mode, ResolvedExperiment,
    Sampler, Tolerances, DEFAULT_SEED, MAX_GRID_N,
};
pub use engine::{default_workers, grid_points, run_indexed, simulate_batch, simulate_batch_in, GridPoint, PathBatch, PathPoint};
pub use laws::*;
pub use stats::{median, summarize, Summary};
pub use counting::{counting_rows, run_counting_concentration, CountingReport, CountingRow, COUNTING_DOMAIN};
pub use independence::*;
pub use dump::write_dump;
pub use engine::domain;
pub use identity::*;
pub use verify::*;
