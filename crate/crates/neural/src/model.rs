//! Post-norm transformer encoder with two correction heads, forward and
//! reverse-mode backward passes.

use ndarray::{s, Axis};
use tispell_core::rng::{Draw, Rng};

use crate::config::{EncoderConfig, HeadMode};
use crate::error::{NeuralError, Result};
use crate::params::{EncoderLayer, Head, LayerNorm, Linear, ModelParams, Tensor};

const LN_EPS: f64 = 1e-5;

/// Dropout state for a training pass.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut Rng,
}

struct NormCache {
    xhat: Tensor,
    inv_std: Vec<f64>,
}

struct LayerCache {
    input: Tensor,
    q: Tensor,
    k: Tensor,
    v: Tensor,
    probs: Vec<Tensor>,
    concat: Tensor,
    attn_mask: Option<Tensor>,
    attn_norm: NormCache,
    mid: Tensor,
    ffn_pre: Tensor,
    ffn_act: Tensor,
    ffn_mask: Option<Tensor>,
    ffn_norm: NormCache,
}

struct HeadCache {
    inputs: Vec<Tensor>,
    pre: Vec<Tensor>,
}

/// Everything the backward pass needs from one forward pass.
pub struct Pass {
    /// Character-head logits; absent in single-head mode.
    pub semi: Option<Tensor>,
    pub final_logits: Tensor,
    pub hidden: Tensor,
    ids: Vec<u32>,
    kv_len: usize,
    embed_mask: Option<Tensor>,
    layers: Vec<LayerCache>,
    char_head: Option<HeadCache>,
    syllable_head: HeadCache,
}

impl Pass {
    /// Post-softmax attention of one layer and head: queries × valid keys.
    pub fn attention(&self, layer: usize, head: usize) -> Option<&Tensor> {
        self.layers.get(layer)?.probs.get(head)
    }

    pub fn positions(&self) -> usize {
        self.ids.len()
    }

    pub fn key_len(&self) -> usize {
        self.kv_len
    }
}

fn col_sum(t: &Tensor) -> Tensor {
    t.sum_axis(Axis(0)).insert_axis(Axis(0))
}

fn affine(x: &Tensor, l: &Linear) -> Tensor {
    x.dot(&l.w) + &l.b
}

fn affine_back(x: &Tensor, dy: &Tensor, l: &Linear, g: &mut Linear) -> Tensor {
    g.w += &x.t().dot(dy);
    g.b += &col_sum(dy);
    dy.dot(&l.w.t())
}

fn relu(t: &Tensor) -> Tensor {
    t.mapv(|v| if v <= 0.0 { 0.0 } else { v })
}

fn relu_back(dy: &Tensor, pre: &Tensor) -> Tensor {
    let mut d = dy.clone();
    d.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    d
}

fn layer_norm(x: &Tensor, p: &LayerNorm) -> (Tensor, NormCache) {
    let d = x.ncols() as f64;
    let mut xhat = x.clone();
    let mut inv_std = Vec::with_capacity(x.nrows());
    for mut row in xhat.rows_mut() {
        let mean = row.sum() / d;
        row.mapv_inplace(|v| v - mean);
        let var = row.iter().map(|v| v * v).sum::<f64>() / d;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        row.mapv_inplace(|v| v * inv);
        inv_std.push(inv);
    }
    let y = &xhat * &p.gain + &p.bias;
    (y, NormCache { xhat, inv_std })
}

fn layer_norm_back(dy: &Tensor, p: &LayerNorm, c: &NormCache, g: &mut LayerNorm) -> Tensor {
    g.gain += &col_sum(&(dy * &c.xhat));
    g.bias += &col_sum(dy);
    let dxhat = dy * &p.gain;
    let d = dy.ncols() as f64;
    let mut dx = Tensor::zeros(dy.raw_dim());
    for (i, mut out) in dx.rows_mut().into_iter().enumerate() {
        let dh = dxhat.row(i);
        let xh = c.xhat.row(i);
        let m1 = dh.sum() / d;
        let m2 = dh.iter().zip(xh.iter()).map(|(a, b)| a * b).sum::<f64>() / d;
        for j in 0..out.len() {
            out[j] = c.inv_std[i] * (dh[j] - m1 - xh[j] * m2);
        }
    }
    dx
}

fn softmax_rows(t: &mut Tensor) {
    for mut row in t.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
}

fn dropout_mask(shape: (usize, usize), d: &mut Option<Dropout<'_>>) -> Option<Tensor> {
    let d = d.as_mut()?;
    if d.rate == 0.0 {
        return None;
    }
    let keep = 1.0 - d.rate;
    Some(Tensor::from_shape_fn(shape, |_| {
        if d.rng.unit() < keep {
            1.0 / keep
        } else {
            0.0
        }
    }))
}

fn check_finite(t: &Tensor, what: impl FnOnce() -> String) -> Result<()> {
    if t.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NeuralError::NonFiniteActivation(what()))
    }
}

fn layer_forward(
    l: &EncoderLayer,
    cfg: &EncoderConfig,
    x: Tensor,
    kv_len: usize,
    dropout: &mut Option<Dropout<'_>>,
) -> (Tensor, LayerCache) {
    let n = x.nrows();
    let dk = cfg.d_head();
    let scale = 1.0 / (dk as f64).sqrt();
    let q = affine(&x, &l.query);
    let k = affine(&x, &l.key);
    let v = affine(&x, &l.value);
    let mut concat = Tensor::zeros((n, cfg.d_model));
    let mut probs = Vec::with_capacity(cfg.heads);
    for h in 0..cfg.heads {
        let cols = h * dk..(h + 1) * dk;
        let qh = q.slice(s![.., cols.clone()]);
        let kh = k.slice(s![..kv_len, cols.clone()]);
        let vh = v.slice(s![..kv_len, cols.clone()]);
        let mut a = qh.dot(&kh.t()) * scale;
        softmax_rows(&mut a);
        concat.slice_mut(s![.., cols]).assign(&a.dot(&vh));
        probs.push(a);
    }
    let mut attn = affine(&concat, &l.output);
    let attn_mask = dropout_mask(attn.dim(), dropout);
    if let Some(m) = &attn_mask {
        attn *= m;
    }
    let (mid, attn_norm) = layer_norm(&(&x + &attn), &l.attn_norm);
    let ffn_pre = affine(&mid, &l.ffn_in);
    let ffn_act = relu(&ffn_pre);
    let mut ffn = affine(&ffn_act, &l.ffn_out);
    let ffn_mask = dropout_mask(ffn.dim(), dropout);
    if let Some(m) = &ffn_mask {
        ffn *= m;
    }
    let (out, ffn_norm) = layer_norm(&(&mid + &ffn), &l.ffn_norm);
    let cache = LayerCache {
        input: x,
        q,
        k,
        v,
        probs,
        concat,
        attn_mask,
        attn_norm,
        mid,
        ffn_pre,
        ffn_act,
        ffn_mask,
        ffn_norm,
    };
    (out, cache)
}

fn layer_backward(
    l: &EncoderLayer,
    cfg: &EncoderConfig,
    c: &LayerCache,
    d_out: &Tensor,
    g: &mut EncoderLayer,
) -> Tensor {
    let dk = cfg.d_head();
    let scale = 1.0 / (dk as f64).sqrt();
    let kv_len = c.probs.first().map_or(0, |p| p.ncols());

    let d_sum2 = layer_norm_back(d_out, &l.ffn_norm, &c.ffn_norm, &mut g.ffn_norm);
    let mut d_ffn = d_sum2.clone();
    if let Some(m) = &c.ffn_mask {
        d_ffn *= m;
    }
    let d_act = affine_back(&c.ffn_act, &d_ffn, &l.ffn_out, &mut g.ffn_out);
    let d_pre = relu_back(&d_act, &c.ffn_pre);
    let d_mid = d_sum2 + affine_back(&c.mid, &d_pre, &l.ffn_in, &mut g.ffn_in);

    let d_sum1 = layer_norm_back(&d_mid, &l.attn_norm, &c.attn_norm, &mut g.attn_norm);
    let mut d_attn = d_sum1.clone();
    if let Some(m) = &c.attn_mask {
        d_attn *= m;
    }
    let d_concat = affine_back(&c.concat, &d_attn, &l.output, &mut g.output);

    let mut dq = Tensor::zeros(c.q.raw_dim());
    let mut dkm = Tensor::zeros(c.k.raw_dim());
    let mut dv = Tensor::zeros(c.v.raw_dim());
    for (h, a) in c.probs.iter().enumerate() {
        let cols = h * dk..(h + 1) * dk;
        let d_o = d_concat.slice(s![.., cols.clone()]);
        let qh = c.q.slice(s![.., cols.clone()]);
        let kh = c.k.slice(s![..kv_len, cols.clone()]);
        let vh = c.v.slice(s![..kv_len, cols.clone()]);
        let da = d_o.dot(&vh.t());
        dv.slice_mut(s![..kv_len, cols.clone()]).assign(&a.t().dot(&d_o));
        let mut ds = da;
        for (mut row, prow) in ds.rows_mut().into_iter().zip(a.rows()) {
            let inner: f64 = row.iter().zip(prow.iter()).map(|(x, p)| x * p).sum();
            row.zip_mut_with(&prow, |x, &p| *x = p * (*x - inner));
        }
        ds *= scale;
        dq.slice_mut(s![.., cols.clone()]).assign(&ds.dot(&kh));
        dkm.slice_mut(s![..kv_len, cols]).assign(&ds.t().dot(&qh));
    }
    let mut dx = d_sum1;
    dx += &affine_back(&c.input, &dq, &l.query, &mut g.query);
    dx += &affine_back(&c.input, &dkm, &l.key, &mut g.key);
    dx += &affine_back(&c.input, &dv, &l.value, &mut g.value);
    dx
}

fn head_forward(h: &Head, x: &Tensor) -> (Tensor, HeadCache) {
    let mut inputs = Vec::with_capacity(h.hidden.len() + 1);
    let mut pre = Vec::with_capacity(h.hidden.len());
    let mut cur = x.clone();
    for l in &h.hidden {
        let p = affine(&cur, l);
        inputs.push(cur);
        cur = relu(&p);
        pre.push(p);
    }
    let out = affine(&cur, &h.out);
    inputs.push(cur);
    (out, HeadCache { inputs, pre })
}

fn head_backward(h: &Head, c: &HeadCache, d_out: &Tensor, g: &mut Head) -> Tensor {
    let last = c.inputs.len() - 1;
    let mut dx = affine_back(&c.inputs[last], d_out, &h.out, &mut g.out);
    for i in (0..h.hidden.len()).rev() {
        let d_pre = relu_back(&dx, &c.pre[i]);
        dx = affine_back(&c.inputs[i], &d_pre, &h.hidden[i], &mut g.hidden[i]);
    }
    dx
}

/// Runs the encoder over `ids` (one row per position). Only the first
/// `kv_len` positions are attended to; later positions are padding.
pub fn encode(
    params: &ModelParams,
    cfg: &EncoderConfig,
    ids: &[u32],
    kv_len: usize,
    mut dropout: Option<Dropout<'_>>,
) -> Result<Pass> {
    let n = ids.len();
    assert!(n <= cfg.max_len, "{n} positions exceed max_len {}", cfg.max_len);
    assert!(kv_len >= 1 && kv_len <= n, "key length {kv_len} outside 1..={n}");
    let mut x = Tensor::zeros((n, cfg.d_model));
    for (i, &id) in ids.iter().enumerate() {
        let row = &params.token_embedding.row(id as usize) + &params.position_embedding.row(i);
        x.row_mut(i).assign(&row);
    }
    let embed_mask = dropout_mask(x.dim(), &mut dropout);
    if let Some(m) = &embed_mask {
        x *= m;
    }
    let mut layers = Vec::with_capacity(cfg.layers);
    for (i, l) in params.layers.iter().enumerate() {
        let (out, cache) = layer_forward(l, cfg, x, kv_len, &mut dropout);
        check_finite(&out, || format!("layers.{i}"))?;
        layers.push(cache);
        x = out;
    }
    let hidden = x;
    let (syll, syllable_head) = head_forward(&params.syllable_head, &hidden);
    let (semi, char_head, final_logits) = match cfg.head_mode {
        HeadMode::Dual => {
            let (m, c) = head_forward(&params.char_head, &hidden);
            let fin = &m + &syll;
            (Some(m), Some(c), fin)
        }
        HeadMode::NoResidual => {
            let (m, c) = head_forward(&params.char_head, &hidden);
            (Some(m), Some(c), syll)
        }
        HeadMode::SingleHead => (None, None, syll),
    };
    check_finite(&final_logits, || "final logits".into())?;
    Ok(Pass {
        semi,
        final_logits,
        hidden,
        ids: ids.to_vec(),
        kv_len,
        embed_mask,
        layers,
        char_head,
        syllable_head,
    })
}

/// Accumulates into `grads` the gradient of a loss whose derivatives with
/// respect to the semi-mask and final logits are `d_semi` and `d_final`.
pub fn backward(
    params: &ModelParams,
    cfg: &EncoderConfig,
    pass: &Pass,
    d_semi: Option<&Tensor>,
    d_final: &Tensor,
    grads: &mut ModelParams,
) {
    let mut d_hidden = head_backward(
        &params.syllable_head,
        &pass.syllable_head,
        d_final,
        &mut grads.syllable_head,
    );
    if let Some(cache) = &pass.char_head {
        let d_char = match (cfg.head_mode, d_semi) {
            (HeadMode::Dual, Some(ds)) => d_final + ds,
            (HeadMode::Dual, None) => d_final.clone(),
            (_, Some(ds)) => ds.clone(),
            (_, None) => Tensor::zeros(d_final.raw_dim()),
        };
        d_hidden += &head_backward(&params.char_head, cache, &d_char, &mut grads.char_head);
    }
    let mut dx = d_hidden;
    for (i, cache) in pass.layers.iter().enumerate().rev() {
        dx = layer_backward(&params.layers[i], cfg, cache, &dx, &mut grads.layers[i]);
    }
    if let Some(m) = &pass.embed_mask {
        dx *= m;
    }
    for (i, &id) in pass.ids.iter().enumerate() {
        let row = dx.row(i);
        let mut t = grads.token_embedding.row_mut(id as usize);
        t += &row;
        let mut p = grads.position_embedding.row_mut(i);
        p += &row;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: HeadMode) -> EncoderConfig {
        EncoderConfig {
            layers: 2,
            heads: 2,
            d_model: 8,
            d_ff: 12,
            max_len: 8,
            dropout: 0.0,
            head_layers: 2,
            head_mode: mode,
        }
    }

    fn zero_prefix(p: &mut ModelParams, prefix: &str) {
        for (name, t) in p.tensors_mut() {
            if name.starts_with(prefix) {
                t.fill(0.0);
            }
        }
    }

    #[test]
    fn zero_layers_reduce_to_normalized_embedding() {
        let c = cfg(HeadMode::Dual);
        let mut p = ModelParams::init(&c, 10, 1);
        zero_prefix(&mut p, "layers.");
        for l in &mut p.layers {
            l.attn_norm.gain.fill(1.0);
            l.ffn_norm.gain.fill(1.0);
        }
        let pass = encode(&p, &c, &[7], 1, None).unwrap();
        let emb = (&p.token_embedding.row(7) + &p.position_embedding.row(0)).insert_axis(Axis(0));
        let unit = LayerNorm {
            gain: Tensor::ones((1, 8)),
            bias: Tensor::zeros((1, 8)),
        };
        let mut expect = emb.to_owned();
        for _ in 0..4 {
            expect = layer_norm(&expect, &unit).0;
        }
        for (a, b) in pass.hidden.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_char_head_gives_constant_bias_logits() {
        let c = cfg(HeadMode::Dual);
        let mut p = ModelParams::init(&c, 10, 2);
        zero_prefix(&mut p, "char_head.");
        p.char_head.out.b = Tensor::from_shape_fn((1, 10), |(_, j)| j as f64 * 0.1);
        let pass = encode(&p, &c, &[2, 6, 7, 3], 4, None).unwrap();
        let semi = pass.semi.as_ref().unwrap();
        assert_eq!(semi.dim(), (4, 10));
        for row in semi.rows() {
            assert_eq!(row, p.char_head.out.b.row(0));
        }
    }

    #[test]
    fn residual_identity() {
        let c = cfg(HeadMode::Dual);
        let mut p = ModelParams::init(&c, 10, 3);
        zero_prefix(&mut p, "syllable_head.");
        let pass = encode(&p, &c, &[2, 6, 7, 8, 3], 5, None).unwrap();
        assert_eq!(pass.final_logits, *pass.semi.as_ref().unwrap());
    }

    #[test]
    fn head_modes_shape_outputs() {
        let ids = [2, 6, 7, 3];
        let p = ModelParams::init(&cfg(HeadMode::Dual), 10, 4);
        let single = encode(&p, &cfg(HeadMode::SingleHead), &ids, 4, None).unwrap();
        assert!(single.semi.is_none());
        let nores = encode(&p, &cfg(HeadMode::NoResidual), &ids, 4, None).unwrap();
        assert_eq!(single.final_logits, nores.final_logits);
        let dual = encode(&p, &cfg(HeadMode::Dual), &ids, 4, None).unwrap();
        let sum = nores.semi.as_ref().unwrap() + &nores.final_logits;
        assert_eq!(dual.final_logits, sum);
    }

    #[test]
    fn attention_rows_are_distributions_over_valid_keys() {
        let c = cfg(HeadMode::Dual);
        let p = ModelParams::init(&c, 10, 5);
        let pass = encode(&p, &c, &[2, 6, 7, 3, 0, 0, 0], 4, None).unwrap();
        for l in 0..2 {
            for h in 0..2 {
                let a = pass.attention(l, h).unwrap();
                assert_eq!(a.dim(), (7, 4));
                for row in a.rows() {
                    assert!((row.sum() - 1.0).abs() < 1e-12);
                    assert!(row.iter().all(|&v| v >= 0.0));
                }
            }
        }
        assert!(pass.attention(2, 0).is_none());
    }

    #[test]
    fn padding_content_does_not_leak_into_valid_positions() {
        let c = cfg(HeadMode::Dual);
        let p = ModelParams::init(&c, 10, 6);
        let a = encode(&p, &c, &[2, 6, 7, 3, 0, 0, 0, 0], 4, None).unwrap();
        let b = encode(&p, &c, &[2, 6, 7, 3, 9, 8, 0, 6], 4, None).unwrap();
        assert_eq!(a.hidden.slice(s![..4, ..]), b.hidden.slice(s![..4, ..]));
        assert_eq!(a.final_logits.slice(s![..4, ..]), b.final_logits.slice(s![..4, ..]));
    }

    #[test]
    fn dropout_is_seeded_and_off_by_default() {
        let c = cfg(HeadMode::Dual);
        let p = ModelParams::init(&c, 10, 7);
        let ids = [2, 6, 7, 8, 3];
        let run = |seed| {
            let mut rng = Rng::new(seed);
            encode(
                &p,
                &c,
                &ids,
                5,
                Some(Dropout {
                    rate: 0.3,
                    rng: &mut rng,
                }),
            )
            .unwrap()
            .final_logits
        };
        assert_eq!(run(1), run(1));
        assert_ne!(run(1), run(2));
        let plain = encode(&p, &c, &ids, 5, None).unwrap().final_logits;
        assert_ne!(plain, run(1));
    }
}
