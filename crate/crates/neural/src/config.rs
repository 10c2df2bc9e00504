use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NeuralError, Result};

/// How the two correction heads produce the final logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeadMode {
    /// Final logits are the character head's logits plus the syllable head's.
    Dual,
    /// Final logits come from the syllable head alone; the character head is still trained.
    NoResidual,
    /// No character head: only the final output is trained and predicted.
    SingleHead,
}

impl HeadMode {
    pub fn name(self) -> &'static str {
        match self {
            HeadMode::Dual => "dual",
            HeadMode::NoResidual => "no-residual",
            HeadMode::SingleHead => "single-head",
        }
    }
}

impl FromStr for HeadMode {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dual" => Ok(HeadMode::Dual),
            "no-residual" => Ok(HeadMode::NoResidual),
            "single-head" => Ok(HeadMode::SingleHead),
            _ => Err(NeuralError::Config(format!(
                "unknown head mode `{s}` (dual, no-residual, single-head)"
            ))),
        }
    }
}

impl fmt::Display for HeadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub layers: usize,
    pub heads: usize,
    pub d_model: usize,
    pub d_ff: usize,
    pub max_len: usize,
    pub dropout: f64,
    /// Hidden layers in each correction head.
    pub head_layers: usize,
    pub head_mode: HeadMode,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            heads: 2,
            d_model: 64,
            d_ff: 256,
            max_len: 64,
            dropout: 0.1,
            head_layers: 2,
            head_mode: HeadMode::Dual,
        }
    }
}

impl EncoderConfig {
    pub fn d_head(&self) -> usize {
        self.d_model / self.heads
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NeuralError::Config(m));
        if self.layers == 0 || self.heads == 0 || self.d_model == 0 || self.d_ff == 0 {
            return bad("layers, heads, d_model and d_ff must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.heads) {
            return bad(format!(
                "d_model {} is not divisible by {} heads",
                self.d_model, self.heads
            ));
        }
        if self.max_len < 2 {
            return bad("max_len must leave room for [BOS] and [EOS]".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(1..=2).contains(&self.head_layers) {
            return bad(format!("head_layers must be 1 or 2, got {}", self.head_layers));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Constant,
    /// `start` for the first half of training, then `end`.
    TwoPhase {
        start: f64,
        end: f64,
    },
    /// Linear decay from the learning rate to zero over all steps.
    Linear,
}

impl FromStr for Schedule {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Schedule::Constant),
            "two-phase" => Ok(Schedule::TwoPhase { start: 1e-4, end: 5e-5 }),
            "linear" => Ok(Schedule::Linear),
            _ => Err(NeuralError::Config(format!(
                "unknown schedule `{s}` (constant, two-phase, linear)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub schedule: Schedule,
    pub warmup_steps: usize,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Weight of the final-output loss term.
    pub w_c: f64,
    /// Put the weight on the semi-mask term instead of the final term.
    pub swap_loss_weight: bool,
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            schedule: Schedule::Constant,
            warmup_steps: 0,
            weight_decay: 1e-2,
            batch_size: 16,
            epochs: 10,
            w_c: 2.0,
            swap_loss_weight: false,
            clip_norm: None,
            seed: 0,
        }
    }
}

/// The loss-weight values of the sweep.
pub const W_C_SWEEP: [f64; 5] = [0.5, 0.8, 1.0, 2.0, 5.0];

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NeuralError::Config(m));
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return bad(format!(
                "learning rate must be non-negative, got {}",
                self.learning_rate
            ));
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 {
            return bad(format!("weight decay must be non-negative, got {}", self.weight_decay));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if !self.w_c.is_finite() || self.w_c <= 0.0 {
            return bad(format!("w_c must be positive, got {}", self.w_c));
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return bad(format!("clip norm must be positive, got {c}"));
            }
        }
        Ok(())
    }

    /// Learning rate at optimizer step `step` (0-based) of `total`.
    pub fn lr_at(&self, step: usize, total: usize) -> f64 {
        let base = match self.schedule {
            Schedule::Constant => self.learning_rate,
            Schedule::TwoPhase { start, end } => {
                if step < total / 2 {
                    start
                } else {
                    end
                }
            }
            Schedule::Linear => self.learning_rate * (1.0 - step as f64 / total.max(1) as f64).max(0.0),
        };
        if step < self.warmup_steps {
            base * (step + 1) as f64 / self.warmup_steps as f64
        } else {
            base
        }
    }

    /// Weights of the (semi-mask, final) loss terms.
    pub fn term_weights(&self) -> (f64, f64) {
        if self.swap_loss_weight {
            (self.w_c, 1.0)
        } else {
            (1.0, self.w_c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let e = EncoderConfig::default();
        e.validate().unwrap();
        assert_eq!(e.d_head(), 32);
        let t = TrainConfig::default();
        t.validate().unwrap();
        assert_eq!(t.w_c, 2.0);
        assert_eq!(t.weight_decay, 1e-2);
        assert_eq!(t.term_weights(), (1.0, 2.0));
    }

    #[test]
    fn invalid_configs() {
        assert!(EncoderConfig {
            heads: 3,
            ..EncoderConfig::default()
        }
        .validate()
        .is_err());
        assert!(EncoderConfig {
            head_layers: 3,
            ..EncoderConfig::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            w_c: 0.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn schedules() {
        let t = TrainConfig {
            schedule: "two-phase".parse().unwrap(),
            warmup_steps: 2,
            ..TrainConfig::default()
        };
        assert_eq!(t.lr_at(0, 10), 0.5e-4);
        assert_eq!(t.lr_at(3, 10), 1e-4);
        assert_eq!(t.lr_at(7, 10), 5e-5);
        let linear = TrainConfig {
            schedule: Schedule::Linear,
            learning_rate: 1.0,
            ..TrainConfig::default()
        };
        assert_eq!(linear.lr_at(0, 4), 1.0);
        assert_eq!(linear.lr_at(3, 4), 0.25);
        let swapped = TrainConfig {
            swap_loss_weight: true,
            ..TrainConfig::default()
        };
        assert_eq!(swapped.term_weights(), (2.0, 1.0));
    }
}
