//! Random variates: independent copies of `X` and full digit chains.

mod chain;
mod iid;
mod rng;

pub use chain::{
    first_digit, next_digit, sample_chain, ChainLimits, ChainPath, ExactRatio,
    DEFAULT_MAX_CHAIN_LEN, DEFAULT_MAX_DIGIT_BITS,
};
pub use iid::{atom_from_uniform, fill_iid_x, sample_iid_x, x_from_uniform};
pub use rng::{check_open_unit, derive_seed, RngStream};
