//! Finite-difference verification of the analytic gradients.

use tispell_core::rng::{Draw, Rng};

use crate::error::Result;
use crate::params::ModelParams;
use crate::tispell::TiSpell;
use crate::train::{batch_gradients, Example};

pub const STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Worst relative error per tensor.
    pub per_tensor: Vec<(String, f64)>,
    pub entries_checked: usize,
}

impl GradCheck {
    pub fn worst(&self) -> Option<&(String, f64)> {
        self.per_tensor.iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Compares analytic gradients of the pooled batch loss (dropout off) with
/// central differences on up to `samples` entries of every tensor.
/// `tamper` may alter the analytic gradients before comparison.
pub fn gradient_check(
    model: &TiSpell,
    batch: &[Example],
    weights: (f64, f64),
    samples: usize,
    seed: u64,
    tamper: Option<&dyn Fn(&mut ModelParams)>,
) -> Result<GradCheck> {
    let (_, mut analytic) = batch_gradients(model, batch, weights, None)?;
    if let Some(f) = tamper {
        f(&mut analytic);
    }
    let mut rng = Rng::new(seed);
    let mut probe = model.clone();
    let names: Vec<(String, usize)> = model
        .params
        .tensors()
        .iter()
        .map(|(n, t)| (n.clone(), t.len()))
        .collect();
    let grads = analytic.tensors();
    let mut per_tensor = Vec::with_capacity(names.len());
    let mut entries_checked = 0;
    for (ti, (name, len)) in names.iter().enumerate() {
        let picks: Vec<usize> = if *len <= samples {
            (0..*len).collect()
        } else {
            (0..samples).map(|_| rng.below(*len)).collect()
        };
        let mut worst: f64 = 0.0;
        for flat in picks {
            let loss_at = |probe: &mut TiSpell, value: f64| -> Result<f64> {
                let mut slots = probe.params.tensors_mut();
                let t = &mut slots[ti].1;
                let cols = t.ncols();
                t[[flat / cols, flat % cols]] = value;
                drop(slots);
                Ok(batch_gradients(probe, batch, weights, None)?.0.total)
            };
            let t = grads[ti].1;
            let idx = [flat / t.ncols(), flat % t.ncols()];
            let orig = model.params.tensors()[ti].1[idx];
            let up = loss_at(&mut probe, orig + STEP)?;
            let down = loss_at(&mut probe, orig - STEP)?;
            loss_at(&mut probe, orig)?;
            let numeric = (up - down) / (2.0 * STEP);
            worst = worst.max(relative_error(t[idx], numeric));
            entries_checked += 1;
        }
        per_tensor.push((name.clone(), worst));
    }
    let max_rel_error = per_tensor.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    Ok(GradCheck {
        max_rel_error,
        per_tensor,
        entries_checked,
    })
}
