//! Multi-level Tibetan spelling correction toolkit: syllable segmentation,
//! corruption synthesis, evaluation metrics and classical correctors.

pub mod augment;
pub mod baselines;
pub mod config;
pub mod correct;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod rng;
pub mod script;

pub use error::{Error, Result};
