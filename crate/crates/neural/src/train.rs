//! Training examples, pooled batch gradients and the AdamW training loop.

use log::info;
use tispell_core::augment::{AugmentConfig, Bucket, CorruptionRecord, Synthesizer};
use tispell_core::rng::{child_seed, Rng};

use crate::config::{HeadMode, TrainConfig};
use crate::error::{NeuralError, Result};
use crate::loss::{cross_entropy_sum, LossBreakdown};
use crate::model::{backward, encode, Dropout};
use crate::optim::{clip_global_norm, AdamW};
use crate::params::ModelParams;
use crate::tispell::TiSpell;
use crate::vocab::{expand_semi_mask, TokenSeq, Vocab};

/// One training triple: what the model reads and the two targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub input: TokenSeq,
    pub semi: TokenSeq,
    pub target: TokenSeq,
    pub bucket: Bucket,
}

impl Example {
    pub fn from_record(record: &CorruptionRecord, vocab: &Vocab, max_len: usize) -> Self {
        let semi_text = expand_semi_mask(&record.source, &record.semi_mask);
        Self {
            input: vocab.tokenize(&record.corrupted, max_len),
            semi: vocab.tokenize(&semi_text, max_len),
            target: vocab.tokenize(&record.source, max_len),
            bucket: record.bucket(),
        }
    }

    /// Positions the model must produce: enough for both input and targets.
    pub fn positions(&self) -> usize {
        self.input.true_len.max(self.target.true_len).max(self.semi.true_len)
    }
}

pub fn examples_from_records(records: &[CorruptionRecord], vocab: &Vocab, max_len: usize) -> Vec<Example> {
    records
        .iter()
        .map(|r| Example::from_record(r, vocab, max_len))
        .collect()
}

/// Where each epoch's training records come from.
#[derive(Debug, Clone)]
pub enum TrainingSource {
    /// A fixed dataset reused every epoch.
    Records(Vec<CorruptionRecord>),
    /// Clean lines corrupted afresh each epoch under a seed derived from the epoch number.
    Regenerate { lines: Vec<String>, augment: AugmentConfig },
}

/// Epochs whose corruptions contribute characters to a regenerated vocabulary.
const VOCAB_EPOCHS: usize = 4;

impl TrainingSource {
    pub fn records(&self, epoch: usize) -> Result<Vec<CorruptionRecord>> {
        match self {
            TrainingSource::Records(r) => Ok(r.clone()),
            TrainingSource::Regenerate { lines, augment } => {
                let cfg = AugmentConfig {
                    seed: child_seed(augment.seed, epoch as u64),
                    ..augment.clone()
                };
                let synth = Synthesizer::new(cfg)?;
                let mut out = Vec::with_capacity(lines.len());
                for (i, line) in lines.iter().enumerate() {
                    if let Ok(r) = synth.record(i, line)? {
                        out.push(r);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Every character of the clean text and of its corruptions.
    pub fn vocab(&self) -> Result<Vocab> {
        let mut chars: Vec<char> = Vec::new();
        let mut add = |r: &CorruptionRecord| chars.extend(r.source.chars().chain(r.corrupted.chars()));
        match self {
            TrainingSource::Records(rs) => rs.iter().for_each(&mut add),
            TrainingSource::Regenerate { augment, .. } => {
                for epoch in 0..VOCAB_EPOCHS {
                    self.records(epoch)?.iter().for_each(&mut add);
                }
                if let Some(a) = &augment.alphabet_override {
                    chars.extend(a.iter().copied());
                }
            }
        }
        Ok(Vocab::from_text_chars(chars))
    }
}

/// Loss of a batch pooled over all non-pad target tokens, with its gradient.
/// Dropout is applied when `rng` is given.
pub fn batch_gradients(
    model: &TiSpell,
    batch: &[Example],
    weights: (f64, f64),
    mut rng: Option<&mut Rng>,
) -> Result<(LossBreakdown, ModelParams)> {
    let cfg = &model.config;
    let semi_tokens: usize = batch.iter().map(|e| e.semi.true_len).sum();
    let final_tokens: usize = batch.iter().map(|e| e.target.true_len).sum();
    if final_tokens == 0 || semi_tokens == 0 {
        return Err(NeuralError::EmptyTarget);
    }
    let use_semi = cfg.head_mode != HeadMode::SingleHead;
    let mut grads = model.params.zeros_like();
    let (mut semi_sum, mut final_sum) = (0.0, 0.0);
    for ex in batch {
        let n = ex.positions();
        let dropout = rng.as_deref_mut().map(|r| Dropout {
            rate: cfg.dropout,
            rng: r,
        });
        let pass = encode(&model.params, cfg, &ex.input.ids[..n], ex.input.true_len, dropout)?;
        let (fl, mut d_final) = cross_entropy_sum(&pass.final_logits, &ex.target.ids[..ex.target.true_len]);
        final_sum += fl;
        d_final *= weights.1 / final_tokens as f64;
        let d_semi = match (&pass.semi, use_semi) {
            (Some(logits), true) => {
                let (sl, mut d) = cross_entropy_sum(logits, &ex.semi.ids[..ex.semi.true_len]);
                semi_sum += sl;
                d *= weights.0 / semi_tokens as f64;
                Some(d)
            }
            _ => None,
        };
        backward(&model.params, cfg, &pass, d_semi.as_ref(), &d_final, &mut grads);
    }
    let semi_mask = if use_semi { semi_sum / semi_tokens as f64 } else { 0.0 };
    let final_ = final_sum / final_tokens as f64;
    let loss = LossBreakdown {
        total: weights.0 * semi_mask + weights.1 * final_,
        semi_mask,
        final_,
        tokens: final_tokens,
    };
    Ok((loss, grads))
}

/// Mean loss terms over one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    /// 1-based epoch number.
    pub epoch: usize,
    pub steps: usize,
    pub loss: f64,
    pub semi_mask: f64,
    pub final_: f64,
    pub learning_rate: f64,
}

pub struct Trainer {
    pub model: TiSpell,
    pub config: TrainConfig,
    pub optimizer: AdamW,
    pub epochs_done: usize,
}

impl Trainer {
    pub fn new(model: TiSpell, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let optimizer = AdamW::new(&model.params);
        Ok(Self {
            model,
            config,
            optimizer,
            epochs_done: 0,
        })
    }

    /// Continues from saved optimizer state after `epochs_done` epochs.
    pub fn resume(model: TiSpell, config: TrainConfig, optimizer: AdamW, epochs_done: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            model,
            config,
            optimizer,
            epochs_done,
        })
    }

    pub fn steps_per_epoch(&self, examples: usize) -> usize {
        examples.div_ceil(self.config.batch_size)
    }

    /// One optimizer update on `batch` at learning rate `lr`.
    pub fn train_step(&mut self, batch: &[Example], lr: f64, dropout: Option<&mut Rng>) -> Result<LossBreakdown> {
        let step = self.optimizer.step;
        let (loss, mut grads) = batch_gradients(&self.model, batch, self.config.term_weights(), dropout)?;
        if !loss.total.is_finite() {
            return Err(NeuralError::NonFinite {
                tensor: "loss".into(),
                step,
            });
        }
        if let Some(tensor) = grads.first_non_finite() {
            return Err(NeuralError::NonFinite {
                tensor: format!("gradient of {tensor}"),
                step,
            });
        }
        if let Some(max) = self.config.clip_norm {
            clip_global_norm(&mut grads, max);
        }
        self.optimizer
            .update(&mut self.model.params, &grads, lr, self.config.weight_decay);
        if let Some(tensor) = self.model.params.first_non_finite() {
            return Err(NeuralError::NonFinite { tensor, step });
        }
        Ok(loss)
    }

    /// One pass over `examples` in a seed-determined order. The shuffle and
    /// dropout streams depend only on the seed and the epoch number, so a
    /// resumed run continues exactly as an uninterrupted one.
    pub fn train_epoch(&mut self, examples: &[Example]) -> Result<EpochStats> {
        if examples.is_empty() {
            return Err(NeuralError::NoExamples);
        }
        let epoch = self.epochs_done;
        let per_epoch = self.steps_per_epoch(examples.len());
        let total = per_epoch * self.config.epochs.max(epoch + 1);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        Rng::child(self.config.seed, 2 * epoch as u64).shuffle(&mut order);
        let mut dropout = Rng::child(self.config.seed, 2 * epoch as u64 + 1);
        let use_dropout = self.model.config.dropout > 0.0;
        let (mut sum, mut semi, mut fin) = (0.0, 0.0, 0.0);
        let mut lr = 0.0;
        for chunk in order.chunks(self.config.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| examples[i].clone()).collect();
            lr = self.config.lr_at(self.optimizer.step, total);
            let rng = if use_dropout { Some(&mut dropout) } else { None };
            let l = self.train_step(&batch, lr, rng)?;
            sum += l.total;
            semi += l.semi_mask;
            fin += l.final_;
        }
        self.epochs_done += 1;
        let n = per_epoch as f64;
        let stats = EpochStats {
            epoch: self.epochs_done,
            steps: per_epoch,
            loss: sum / n,
            semi_mask: semi / n,
            final_: fin / n,
            learning_rate: lr,
        };
        info!(
            "epoch {}: loss {:.4} (semi-mask {:.4}, final {:.4}) lr {:.2e}",
            stats.epoch, stats.loss, stats.semi_mask, stats.final_, stats.learning_rate
        );
        Ok(stats)
    }
}

/// Mean loss of `examples` under the current parameters, without dropout.
pub fn evaluate_loss(model: &TiSpell, examples: &[Example], weights: (f64, f64)) -> Result<LossBreakdown> {
    Ok(batch_gradients(model, examples, weights, None)?.0)
}
