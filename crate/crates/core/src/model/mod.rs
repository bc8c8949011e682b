//! Mathematical objects of the model and their exact formulas.
//!
//! Everything here is immutable after construction and safe to share across
//! threads.

mod config;
mod distribution;
mod family;
mod laws;
mod plan;
mod sequence;

pub use config::{
    BetaChoice, DistributionConfig, FamilyConfig, ModelConfig, PlanConfig, SequenceConfig,
};
pub use distribution::DistributionSpec;
pub use family::{DigitKernel, ExpansionFamily, FamilyKind};
pub use laws::{
    conditional_digit_mass, delta, delta_exact, digit_mass, digit_tail, ratio_exact,
};
pub(crate) use laws::rational_to_f64;
pub use plan::{truncation_level, TrimTruncPlan};
pub use sequence::{harmonic, ratio_to_f64, GoodSequence, SequenceKind};

/// The fixed ingredients of one experiment.
#[derive(Clone, Debug)]
pub struct Model {
    pub dist: DistributionSpec,
    pub seq: GoodSequence,
    pub family: ExpansionFamily,
}
