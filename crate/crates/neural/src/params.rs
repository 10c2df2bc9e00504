//! Model parameters as named dense tensors. Biases and layer-norm vectors
//! are stored as `1 × n` matrices so every tensor has the same type.

use ndarray::Array2;
use tispell_core::rng::Rng;

use crate::config::EncoderConfig;

pub type Tensor = Array2<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    fn init(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Self {
        let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
        Self {
            w: Tensor::from_shape_fn((fan_in, fan_out), |_| rng.normal() * std),
            b: Tensor::zeros((1, fan_out)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gain: Tensor,
    pub bias: Tensor,
}

impl LayerNorm {
    fn init(d: usize) -> Self {
        Self {
            gain: Tensor::ones((1, d)),
            bias: Tensor::zeros((1, d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayer {
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
    pub attn_norm: LayerNorm,
    pub ffn_in: Linear,
    pub ffn_out: Linear,
    pub ffn_norm: LayerNorm,
}

/// A ReLU MLP from the encoder width to vocabulary logits.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub hidden: Vec<Linear>,
    pub out: Linear,
}

impl Head {
    fn init(d: usize, vocab: usize, layers: usize, rng: &mut Rng) -> Self {
        Self {
            hidden: (0..layers).map(|_| Linear::init(d, d, rng)).collect(),
            out: Linear::init(d, vocab, rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub token_embedding: Tensor,
    pub position_embedding: Tensor,
    pub layers: Vec<EncoderLayer>,
    pub char_head: Head,
    pub syllable_head: Head,
}

/// Uniform access to every tensor of a parameter structure, in a fixed order.
pub trait Tensors {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>);
    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>);
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

impl Tensors for Linear {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        out.push((join(prefix, "w"), &self.w));
        out.push((join(prefix, "b"), &self.b));
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        out.push((join(prefix, "w"), &mut self.w));
        out.push((join(prefix, "b"), &mut self.b));
    }
}

impl Tensors for LayerNorm {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        out.push((join(prefix, "gain"), &self.gain));
        out.push((join(prefix, "bias"), &self.bias));
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        out.push((join(prefix, "gain"), &mut self.gain));
        out.push((join(prefix, "bias"), &mut self.bias));
    }
}

impl Tensors for EncoderLayer {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        self.query.collect(&join(prefix, "query"), out);
        self.key.collect(&join(prefix, "key"), out);
        self.value.collect(&join(prefix, "value"), out);
        self.output.collect(&join(prefix, "output"), out);
        self.attn_norm.collect(&join(prefix, "attn_norm"), out);
        self.ffn_in.collect(&join(prefix, "ffn_in"), out);
        self.ffn_out.collect(&join(prefix, "ffn_out"), out);
        self.ffn_norm.collect(&join(prefix, "ffn_norm"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        self.query.collect_mut(&join(prefix, "query"), out);
        self.key.collect_mut(&join(prefix, "key"), out);
        self.value.collect_mut(&join(prefix, "value"), out);
        self.output.collect_mut(&join(prefix, "output"), out);
        self.attn_norm.collect_mut(&join(prefix, "attn_norm"), out);
        self.ffn_in.collect_mut(&join(prefix, "ffn_in"), out);
        self.ffn_out.collect_mut(&join(prefix, "ffn_out"), out);
        self.ffn_norm.collect_mut(&join(prefix, "ffn_norm"), out);
    }
}

impl Tensors for Head {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        for (i, l) in self.hidden.iter().enumerate() {
            l.collect(&join(prefix, &format!("hidden.{i}")), out);
        }
        self.out.collect(&join(prefix, "out"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        for (i, l) in self.hidden.iter_mut().enumerate() {
            l.collect_mut(&join(prefix, &format!("hidden.{i}")), out);
        }
        self.out.collect_mut(&join(prefix, "out"), out);
    }
}

impl Tensors for ModelParams {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Tensor)>) {
        out.push((join(prefix, "token_embedding"), &self.token_embedding));
        out.push((join(prefix, "position_embedding"), &self.position_embedding));
        for (i, l) in self.layers.iter().enumerate() {
            l.collect(&join(prefix, &format!("layers.{i}")), out);
        }
        self.char_head.collect(&join(prefix, "char_head"), out);
        self.syllable_head.collect(&join(prefix, "syllable_head"), out);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Tensor)>) {
        out.push((join(prefix, "token_embedding"), &mut self.token_embedding));
        out.push((join(prefix, "position_embedding"), &mut self.position_embedding));
        for (i, l) in self.layers.iter_mut().enumerate() {
            l.collect_mut(&join(prefix, &format!("layers.{i}")), out);
        }
        self.char_head.collect_mut(&join(prefix, "char_head"), out);
        self.syllable_head.collect_mut(&join(prefix, "syllable_head"), out);
    }
}

fn sinusoid(pos: usize, i: usize, d: usize) -> f64 {
    let rate = 1.0 / 10_000f64.powf((2 * (i / 2)) as f64 / d as f64);
    let angle = pos as f64 * rate;
    if i.is_multiple_of(2) {
        angle.sin()
    } else {
        angle.cos()
    }
}

impl ModelParams {
    /// Random initialization; position embeddings start from sinusoids.
    pub fn init(cfg: &EncoderConfig, vocab_size: usize, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let d = cfg.d_model;
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let token_embedding = Tensor::from_shape_fn((vocab_size, d), |_| rng.normal() * scale);
        let position_embedding = Tensor::from_shape_fn((cfg.max_len, d), |(p, i)| sinusoid(p, i, d));
        let layers = (0..cfg.layers)
            .map(|_| EncoderLayer {
                query: Linear::init(d, d, &mut rng),
                key: Linear::init(d, d, &mut rng),
                value: Linear::init(d, d, &mut rng),
                output: Linear::init(d, d, &mut rng),
                attn_norm: LayerNorm::init(d),
                ffn_in: Linear::init(d, cfg.d_ff, &mut rng),
                ffn_out: Linear::init(cfg.d_ff, d, &mut rng),
                ffn_norm: LayerNorm::init(d),
            })
            .collect();
        let char_head = Head::init(d, vocab_size, cfg.head_layers, &mut rng);
        let syllable_head = Head::init(d, vocab_size, cfg.head_layers, &mut rng);
        Self {
            token_embedding,
            position_embedding,
            layers,
            char_head,
            syllable_head,
        }
    }

    pub fn tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        self.collect("", &mut out);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        self.collect_mut("", &mut out);
        out
    }

    /// Same structure, every entry zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, t) in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Name of the first tensor holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<String> {
        self.tensors()
            .into_iter()
            .find(|(_, t)| t.iter().any(|x| !x.is_finite()))
            .map(|(n, _)| n)
    }

    pub fn squared_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|(_, t)| t.iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, t) in self.tensors_mut() {
            t.mapv_inplace(|x| x * factor);
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for ((_, a), (_, b)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            *a += b;
        }
    }
}
