pub mod error;
pub mod flowdata;
pub mod forestpa;
pub mod metrics;
pub mod registry;
pub mod reptree;
pub mod ripper;
pub mod rng;
pub mod samples;
pub mod stack;
pub mod synth;
mod textfmt;
pub mod tree;

pub use error::{Error, Result};
pub use samples::Samples;
