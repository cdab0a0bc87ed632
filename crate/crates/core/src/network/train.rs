//! Loss, Adam, the training loop, and evaluation.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conv::{sobolev_penalty, WeightFnParams};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::network::forward::{network_backward, network_forward, network_forward_cached};
use crate::network::spec::NetworkSpec;
use crate::network::state::{LayerState, ModelState};
use crate::rng::{derive_seed, seeded_rng};

/// Seed root for ε-ball subselection during evaluation. A fixed value keeps
/// `evaluate` a pure function of the example geometry, independent of
/// dataset ordering.
const EVAL_SEED: u64 = 0x5eed_e7a1;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    /// Sobolev penalty coefficient for cubic-polynomial layers (0 disables).
    pub sobolev_lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Drop input points whose feature max is at or below this threshold.
    /// `None` keeps every pixel.
    pub prune_threshold: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 60,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            sobolev_lambda: 1e-6,
            epochs: 20,
            seed: 0,
            prune_threshold: None,
        }
    }
}

/// Softmax cross-entropy loss and its gradient w.r.t. the logits.
pub fn cross_entropy(logits: &Array1<f64>, label: usize) -> (f64, Array1<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Array1<f64> = logits.mapv(|v| (v - max).exp());
    let sum: f64 = exp.sum();
    let loss = sum.ln() + max - logits[label];
    let mut grad = exp / sum;
    grad[label] -= 1.0;
    (loss, grad)
}

/// Sum of the Sobolev penalties of every cubic-polynomial layer.
pub fn model_sobolev_penalty(state: &ModelState, lambda: f64) -> f64 {
    state
        .layers
        .iter()
        .filter_map(|l| match l {
            LayerState::PointConv(p) => match &p.weight_fn {
                wf @ WeightFnParams::CubicPoly { .. } => {
                    Some(sobolev_penalty(wf, lambda).expect("cubic variant").0)
                }
                _ => None,
            },
            _ => None,
        })
        .sum()
}

/// One optimization step on a batch.
///
/// The loss is the batch-mean cross-entropy plus the Sobolev penalty summed
/// over polynomial layers; parameters receive a single Adam update. The
/// ε-ball subselection stream is derived from `(cfg.seed, state.step,
/// example index in batch)`, so the step is deterministic.
pub fn train_step(
    spec: &NetworkSpec,
    state: &mut ModelState,
    batch: &[(PointCloud, usize)],
    cfg: &TrainConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::MisalignedArrays("empty batch".into()));
    }

    let per_example: Vec<Result<(Vec<LayerState>, f64)>> = batch
        .par_iter()
        .enumerate()
        .map(|(i, (cloud, label))| {
            let seed = derive_seed(cfg.seed, &[state.step, i as u64]);
            let cache = network_forward_cached(spec, state, cloud, seed)?;
            let (loss, grad_logits) = cross_entropy(&cache.logits, *label);
            let mut grads = state.zero_grads();
            network_backward(state, &cache, &grad_logits, &mut grads)?;
            Ok((grads, loss))
        })
        .collect();

    // Fixed-order reduction keeps runs bit-identical.
    let mut total_loss = 0.0;
    let mut grads: Option<Vec<LayerState>> = None;
    for item in per_example {
        let (example_grads, loss) = item?;
        total_loss += loss;
        match grads.as_mut() {
            None => grads = Some(example_grads),
            Some(acc) => {
                for (a, g) in acc.iter_mut().zip(&example_grads) {
                    a.add_assign(g);
                }
            }
        }
    }
    let mut grads = grads.expect("non-empty batch");
    let scale = 1.0 / batch.len() as f64;
    for g in &mut grads {
        g.scale(scale);
    }

    let mut loss = total_loss * scale;
    if cfg.sobolev_lambda > 0.0 {
        loss += model_sobolev_penalty(state, cfg.sobolev_lambda);
        add_sobolev_grads(state, cfg.sobolev_lambda, &mut grads);
    }
    if !loss.is_finite() {
        return Err(Error::Diverged);
    }

    adam_update(state, &grads, cfg);
    Ok(loss)
}

fn add_sobolev_grads(state: &ModelState, lambda: f64, grads: &mut [LayerState]) {
    for (param, grad) in state.layers.iter().zip(grads.iter_mut()) {
        let LayerState::PointConv(p) = param else { continue };
        let wf @ WeightFnParams::CubicPoly { .. } = &p.weight_fn else { continue };
        let (_, g_theta) = sobolev_penalty(wf, lambda).expect("cubic variant");
        let LayerState::PointConv(gp) = grad else { unreachable!("shapes mirror params") };
        let WeightFnParams::CubicPoly { theta, .. } = &mut gp.weight_fn else {
            unreachable!("shapes mirror params")
        };
        *theta += &g_theta;
    }
}

/// Bias-corrected Adam over every parameter tensor.
fn adam_update(state: &mut ModelState, grads: &[LayerState], cfg: &TrainConfig) {
    state.step += 1;
    let t = state.step as i32;
    let lr_t =
        cfg.learning_rate * (1.0 - cfg.beta2.powi(t)).sqrt() / (1.0 - cfg.beta1.powi(t));
    let ModelState { layers, adam_m, adam_v, .. } = state;
    for (((p_layer, m_layer), v_layer), g_layer) in
        layers.iter_mut().zip(adam_m.iter_mut()).zip(adam_v.iter_mut()).zip(grads)
    {
        let mut ps = p_layer.tensors_mut();
        let mut ms = m_layer.tensors_mut();
        let mut vs = v_layer.tensors_mut();
        let gs = g_layer.tensors();
        for (((p, m), v), (_, g)) in ps.iter_mut().zip(ms.iter_mut()).zip(vs.iter_mut()).zip(gs) {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
                p[i] -= lr_t * m[i] / (v[i].sqrt() + cfg.adam_epsilon);
            }
        }
    }
}

/// Shuffled epoch-wise training over a dataset.
///
/// Returns the per-epoch mean batch losses. `progress`, when given, receives
/// `(epoch, mean_loss)` after each epoch.
pub fn fit(
    spec: &NetworkSpec,
    state: &mut ModelState,
    train_set: &[(PointCloud, usize)],
    cfg: &TrainConfig,
    progress: Option<&dyn Fn(usize, f64)>,
) -> Result<Vec<f64>> {
    const SHUFFLE_TAG: u64 = 0x7355_7ff1;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..cfg.epochs {
        let mut rng = seeded_rng(derive_seed(cfg.seed, &[SHUFFLE_TAG, epoch as u64]));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(PointCloud, usize)> =
                chunk.iter().map(|&i| train_set[i].clone()).collect();
            epoch_loss += train_step(spec, state, &batch, cfg)?;
            batches += 1;
        }
        let mean = epoch_loss / batches as f64;
        if let Some(cb) = progress {
            cb(epoch, mean);
        }
        epoch_losses.push(mean);
    }
    Ok(epoch_losses)
}

/// Argmax-logit accuracy over a dataset.
pub fn evaluate(
    spec: &NetworkSpec,
    state: &ModelState,
    dataset: &[(PointCloud, usize)],
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::MisalignedArrays("empty dataset".into()));
    }
    let correct: usize = dataset
        .par_iter()
        .map(|(cloud, label)| {
            let logits = network_forward(spec, state, cloud, EVAL_SEED)?;
            Ok(usize::from(argmax(&logits) == *label))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(correct as f64 / dataset.len() as f64)
}

/// Index of the largest logit, lowest index on ties.
pub fn argmax(v: &Array1<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cross_entropy_matches_closed_form() {
        let logits = array![1.0, 2.0, 3.0];
        let (loss, grad) = cross_entropy(&logits, 2);
        let z: f64 = logits.mapv(f64::exp).sum();
        assert!((loss - (z.ln() - 3.0)).abs() < 1e-12);
        // Gradient sums to zero and is softmax - onehot.
        assert!(grad.sum().abs() < 1e-12);
        assert!((grad[0] - 1.0_f64.exp() / z).abs() < 1e-12);
        assert!((grad[2] - (3.0_f64.exp() / z - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_is_shift_invariant() {
        let a = cross_entropy(&array![1.0, -2.0, 0.5], 0).0;
        let b = cross_entropy(&array![1001.0, 998.0, 1000.5], 0).0;
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&array![0.5, 2.0, 2.0, -1.0]), 1);
    }
}
