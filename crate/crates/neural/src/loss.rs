//! Token-level cross-entropy for the two prediction targets.

use crate::error::{NeuralError, Result};
use crate::params::Tensor;
use crate::vocab::TokenSeq;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    /// Mean cross-entropy of the character head against the semi-mask target.
    pub semi_mask: f64,
    /// Mean cross-entropy of the final logits against the clean target.
    pub final_: f64,
    /// Non-pad target positions averaged over.
    pub tokens: usize,
}

/// Summed cross-entropy of the first `targets.len()` rows of `logits`, and
/// its gradient with respect to `logits` (zero on the remaining rows).
pub fn cross_entropy_sum(logits: &Tensor, targets: &[u32]) -> (f64, Tensor) {
    let mut grad = Tensor::zeros(logits.raw_dim());
    let mut total = 0.0;
    for (i, &t) in targets.iter().enumerate() {
        let row = logits.row(i);
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        total += log_z - row[t as usize];
        let mut g = grad.row_mut(i);
        for (j, v) in row.iter().enumerate() {
            g[j] = (v - log_z).exp();
        }
        g[t as usize] -= 1.0;
    }
    (total, grad)
}

/// Per-sequence loss: `weights.0 * semi_mask + weights.1 * final`. Without
/// character logits the semi-mask term is zero.
pub fn loss(
    semi_logits: Option<&Tensor>,
    final_logits: &Tensor,
    semi_target: &TokenSeq,
    final_target: &TokenSeq,
    weights: (f64, f64),
) -> Result<LossBreakdown> {
    let n = final_target.true_len;
    if n == 0 {
        return Err(NeuralError::EmptyTarget);
    }
    let (fin, _) = cross_entropy_sum(final_logits, &final_target.ids[..n]);
    let semi = match semi_logits {
        Some(l) => {
            if semi_target.true_len == 0 {
                return Err(NeuralError::EmptyTarget);
            }
            cross_entropy_sum(l, &semi_target.ids[..semi_target.true_len]).0 / semi_target.true_len as f64
        }
        None => 0.0,
    };
    let fin = fin / n as f64;
    Ok(LossBreakdown {
        total: weights.0 * semi + weights.1 * fin,
        semi_mask: semi,
        final_: fin,
        tokens: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::{PAD, UNK};

    fn seq(ids: &[u32], len: usize) -> TokenSeq {
        let mut v = ids.to_vec();
        let true_len = v.len();
        v.resize(len, PAD);
        TokenSeq {
            ids: v,
            true_len,
            truncated: 0,
            unknown: 0,
        }
    }

    #[test]
    fn uniform_logits_give_log_vocab() {
        let m = 7;
        let logits = Tensor::zeros((5, m));
        let t = seq(&[2, 6, 3], 5);
        let l = loss(Some(&logits), &logits, &t, &t, (1.0, 2.0)).unwrap();
        let ln_m = (m as f64).ln();
        assert!((l.semi_mask - ln_m).abs() < 1e-12);
        assert!((l.final_ - ln_m).abs() < 1e-12);
        assert!((l.total - 3.0 * ln_m).abs() < 1e-12);
    }

    #[test]
    fn confident_correct_logits_approach_zero() {
        let t = seq(&[2, 6, 3], 4);
        let mut logits = Tensor::zeros((4, 8));
        for (i, &id) in t.ids[..3].iter().enumerate() {
            logits[[i, id as usize]] = 60.0;
        }
        let l = loss(Some(&logits), &logits, &t, &t, (1.0, 2.0)).unwrap();
        assert!(l.total < 1e-20 && l.total >= 0.0);
    }

    #[test]
    fn matches_scalar_softmax_oracle() {
        let logits = Tensor::from_shape_fn((4, 5), |(i, j)| ((i * 7 + j * 3) % 11) as f64 * 0.37 - 1.0);
        let semi_logits = Tensor::from_shape_fn((4, 5), |(i, j)| ((i * 5 + j) % 7) as f64 * 0.51 - 0.5);
        let target = seq(&[2, 4, UNK, 3], 4);
        let semi = seq(&[2, 0, 4, 3], 4);
        let ce = |l: &Tensor, t: &TokenSeq| -> f64 {
            let mut s = 0.0;
            for i in 0..t.true_len {
                let z: f64 = (0..5).map(|j| l[[i, j]].exp()).sum();
                s -= (l[[i, t.ids[i] as usize]].exp() / z).ln();
            }
            s / t.true_len as f64
        };
        let l = loss(Some(&semi_logits), &logits, &semi, &target, (1.0, 2.0)).unwrap();
        assert!((l.final_ - ce(&logits, &target)).abs() < 1e-12);
        assert!((l.semi_mask - ce(&semi_logits, &semi)).abs() < 1e-12);
        assert!((l.total - (l.semi_mask + 2.0 * l.final_)).abs() < 1e-12);
    }

    #[test]
    fn padding_is_excluded() {
        let mut logits = Tensor::zeros((6, 4));
        logits[[4, 1]] = 100.0;
        logits[[5, 2]] = -100.0;
        let t = seq(&[2, 3], 6);
        let l = loss(None, &logits, &t, &t, (1.0, 1.0)).unwrap();
        assert!((l.final_ - 4f64.ln()).abs() < 1e-12);
        assert_eq!(l.semi_mask, 0.0);
        let (_, g) = cross_entropy_sum(&logits, &t.ids[..2]);
        assert!(g.rows().into_iter().skip(2).all(|r| r.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn empty_target_is_an_error() {
        let logits = Tensor::zeros((3, 4));
        let t = seq(&[], 3);
        assert!(matches!(
            loss(None, &logits, &t, &t, (1.0, 1.0)),
            Err(NeuralError::EmptyTarget)
        ));
    }
}
