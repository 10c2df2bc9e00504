//! The trained corrector: configuration, vocabulary and parameters together.

use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use tispell_core::correct::{Corrector, CorrectorRegistry};

use crate::checkpoint;
use crate::config::EncoderConfig;
use crate::error::{NeuralError, Result};
use crate::model::{encode, Pass};
use crate::params::{ModelParams, Tensor};
use crate::vocab::{TokenSeq, Vocab};

#[derive(Debug, Clone, PartialEq)]
pub struct TiSpell {
    pub config: EncoderConfig,
    pub vocab: Vocab,
    pub params: ModelParams,
}

/// Both stages of a correction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correction {
    pub semi_mask: String,
    pub final_text: String,
    /// Input characters dropped to fit the model's length.
    pub truncated: usize,
}

fn argmax_ids(logits: &Tensor) -> Vec<u32> {
    logits
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best as u32
        })
        .collect()
}

impl TiSpell {
    pub fn new(config: EncoderConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let params = ModelParams::init(&config, vocab.len(), seed);
        Ok(Self { config, vocab, params })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(checkpoint::load(path)?.model)
    }

    pub fn tokenize(&self, text: &str) -> TokenSeq {
        self.vocab.tokenize(text, self.config.max_len)
    }

    /// Inference pass over every position, attending to the input only.
    pub fn infer(&self, input: &TokenSeq) -> Result<Pass> {
        encode(&self.params, &self.config, &input.ids, input.true_len, None)
    }

    pub fn correct_both(&self, text: &str) -> Result<Correction> {
        let input = self.tokenize(text);
        if input.truncated > 0 {
            warn!(
                "line longer than {} positions; correcting a truncated prefix",
                self.config.max_len
            );
        }
        let pass = self.infer(&input)?;
        let final_text = self.vocab.decode(&argmax_ids(&pass.final_logits));
        let semi_mask = match &pass.semi {
            Some(l) => self.vocab.decode(&argmax_ids(l)),
            None => final_text.clone(),
        };
        Ok(Correction {
            semi_mask,
            final_text,
            truncated: input.truncated,
        })
    }

    /// Post-softmax attention over the non-pad positions of `text`: an n × n matrix.
    pub fn attention(&self, text: &str, layer: usize, head: usize) -> Result<Tensor> {
        if layer >= self.config.layers || head >= self.config.heads {
            return Err(NeuralError::AttentionIndex {
                layer,
                head,
                layers: self.config.layers,
                heads: self.config.heads,
            });
        }
        let input = self.tokenize(text);
        let pass = encode(
            &self.params,
            &self.config,
            &input.ids[..input.true_len],
            input.true_len,
            None,
        )?;
        Ok(pass.attention(layer, head).expect("index checked").clone())
    }
}

/// One CSV row per query position, one column per key.
pub fn attention_csv(matrix: &Tensor) -> String {
    let mut out = String::new();
    for row in matrix.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.9}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

impl Corrector for TiSpell {
    fn name(&self) -> &str {
        "tispell"
    }

    fn correct(&self, text: &str) -> String {
        match self.correct_both(text) {
            Ok(c) => c.final_text,
            Err(e) => {
                warn!("correction failed, returning input: {e}");
                text.to_string()
            }
        }
    }
}

/// Adds the `tispell` system, loaded from `--model`.
pub fn register(registry: &mut CorrectorRegistry) {
    registry.register("tispell", |args| {
        let path = args.model_path("tispell")?;
        let model = TiSpell::load(&path).map_err(|e| tispell_core::Error::Config(e.to_string()))?;
        Ok(Box::new(model))
    });
}
