//! A small transformer spelling corrector with a semi-masked character head
//! and a syllable head, trained from scratch with manual backpropagation.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod gradcheck;
pub mod loss;
pub mod model;
pub mod optim;
pub mod params;
pub mod tispell;
pub mod train;
pub mod vocab;

pub use config::{EncoderConfig, HeadMode, Schedule, TrainConfig, W_C_SWEEP};
pub use error::{NeuralError, Result};
pub use tispell::{attention_csv, register, Correction, TiSpell};
pub use train::{examples_from_records, EpochStats, Example, Trainer, TrainingSource};
pub use vocab::Vocab;
