//! Trainable state: per-layer parameters and Adam moment buffers.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::conv::{
    glorot_uniform, DescriptorKind, PointConvLayerGrads, PointConvLayerParams, WeightFnGrads,
    WeightFnParams,
};
use crate::error::{Error, Result};
use crate::network::spec::{LayerSpec, NetworkSpec, WeightFnKind};
use crate::rng::seeded_rng;

/// Parameters of one layer; stateless layers hold nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerState {
    PointConv(PointConvLayerParams),
    FullyConnected { w: Array2<f64>, b: Array1<f64> },
    Stateless,
}

impl LayerState {
    /// Same shapes, all zeros. Used for gradients and Adam moments.
    pub fn zeros_like(&self) -> LayerState {
        match self {
            LayerState::PointConv(p) => {
                let weight_fn = match &p.weight_fn {
                    WeightFnParams::Mlp { input_kind, activation, weights, biases } => {
                        WeightFnParams::Mlp {
                            input_kind: *input_kind,
                            activation: *activation,
                            weights: weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
                            biases: biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
                        }
                    }
                    WeightFnParams::CubicPoly { dim, theta } => WeightFnParams::CubicPoly {
                        dim: *dim,
                        theta: Array2::zeros(theta.raw_dim()),
                    },
                };
                LayerState::PointConv(PointConvLayerParams {
                    weight_fn,
                    h: Array2::zeros(p.h.raw_dim()),
                    bias: Array1::zeros(p.bias.raw_dim()),
                    c_in: p.c_in,
                    c_out: p.c_out,
                    c_mid: p.c_mid,
                })
            }
            LayerState::FullyConnected { w, b } => LayerState::FullyConnected {
                w: Array2::zeros(w.raw_dim()),
                b: Array1::zeros(b.raw_dim()),
            },
            LayerState::Stateless => LayerState::Stateless,
        }
    }

    /// Tensor slices in canonical order (weight-fn tensors, then `h`/`w`,
    /// then bias).
    pub fn tensors(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = Vec::new();
        match self {
            LayerState::PointConv(p) => {
                match &p.weight_fn {
                    WeightFnParams::Mlp { weights, biases, .. } => {
                        const W_NAMES: [&str; 3] = ["wf.w0", "wf.w1", "wf.w2"];
                        const B_NAMES: [&str; 3] = ["wf.b0", "wf.b1", "wf.b2"];
                        for (i, (w, b)) in weights.iter().zip(biases).enumerate() {
                            out.push((W_NAMES[i], w.as_slice().expect("row-major")));
                            out.push((B_NAMES[i], b.as_slice().expect("contiguous")));
                        }
                    }
                    WeightFnParams::CubicPoly { theta, .. } => {
                        out.push(("theta", theta.as_slice().expect("row-major")));
                    }
                }
                out.push(("h", p.h.as_slice().expect("row-major")));
                out.push(("bias", p.bias.as_slice().expect("contiguous")));
            }
            LayerState::FullyConnected { w, b } => {
                out.push(("w", w.as_slice().expect("row-major")));
                out.push(("b", b.as_slice().expect("contiguous")));
            }
            LayerState::Stateless => {}
        }
        out
    }

    /// Mutable tensor slices, same order as [`LayerState::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::new();
        match self {
            LayerState::PointConv(p) => {
                match &mut p.weight_fn {
                    WeightFnParams::Mlp { weights, biases, .. } => {
                        for (w, b) in weights.iter_mut().zip(biases.iter_mut()) {
                            out.push(w.as_slice_mut().expect("row-major"));
                            out.push(b.as_slice_mut().expect("contiguous"));
                        }
                    }
                    WeightFnParams::CubicPoly { theta, .. } => {
                        out.push(theta.as_slice_mut().expect("row-major"));
                    }
                }
                out.push(p.h.as_slice_mut().expect("row-major"));
                out.push(p.bias.as_slice_mut().expect("contiguous"));
            }
            LayerState::FullyConnected { w, b } => {
                out.push(w.as_slice_mut().expect("row-major"));
                out.push(b.as_slice_mut().expect("contiguous"));
            }
            LayerState::Stateless => {}
        }
        out
    }

    /// Tensor shapes, aligned with [`LayerState::tensors`].
    pub fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        match self {
            LayerState::PointConv(p) => {
                let mut shapes = Vec::new();
                match &p.weight_fn {
                    WeightFnParams::Mlp { weights, biases, .. } => {
                        for (w, b) in weights.iter().zip(biases) {
                            shapes.push(w.shape().to_vec());
                            shapes.push(b.shape().to_vec());
                        }
                    }
                    WeightFnParams::CubicPoly { theta, .. } => shapes.push(theta.shape().to_vec()),
                }
                shapes.push(p.h.shape().to_vec());
                shapes.push(p.bias.shape().to_vec());
                shapes
            }
            LayerState::FullyConnected { w, b } => vec![w.shape().to_vec(), b.shape().to_vec()],
            LayerState::Stateless => Vec::new(),
        }
    }

    /// Add a conv layer's gradients into this (gradient-shaped) state.
    pub fn accumulate_conv(&mut self, grads: &PointConvLayerGrads) {
        let LayerState::PointConv(acc) = self else {
            panic!("accumulate_conv on a non-conv layer state");
        };
        match (&mut acc.weight_fn, &grads.weight_fn) {
            (
                WeightFnParams::Mlp { weights, biases, .. },
                WeightFnGrads::Mlp { weights: gw, biases: gb },
            ) => {
                for (w, g) in weights.iter_mut().zip(gw) {
                    *w += g;
                }
                for (b, g) in biases.iter_mut().zip(gb) {
                    *b += g;
                }
            }
            (WeightFnParams::CubicPoly { theta, .. }, WeightFnGrads::CubicPoly { theta: gt }) => {
                *theta += gt;
            }
            _ => panic!("weight-fn variant mismatch in gradient accumulation"),
        }
        acc.h += &grads.h;
        acc.bias += &grads.bias;
    }

    /// Add another state of the same shape into this one.
    pub fn add_assign(&mut self, other: &LayerState) {
        let mut mine = self.tensors_mut();
        let theirs = other.tensors();
        debug_assert_eq!(mine.len(), theirs.len());
        for (dst, (_, src)) in mine.iter_mut().zip(theirs) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    /// Multiply every tensor entry by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            for v in t {
                *v *= factor;
            }
        }
    }
}

/// Full trainable state: parameters, Adam moments, and the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub layers: Vec<LayerState>,
    pub adam_m: Vec<LayerState>,
    pub adam_v: Vec<LayerState>,
    pub step: u64,
}

impl ModelState {
    /// Zero-gradient accumulator with the same shapes as the parameters.
    pub fn zero_grads(&self) -> Vec<LayerState> {
        self.layers.iter().map(LayerState::zeros_like).collect()
    }
}

/// Initialize parameters for a network spec.
///
/// All weights are Glorot-uniform draws from a ChaCha stream seeded by
/// `seed`, consumed in layer order; all biases start at zero.
pub fn init_state(spec: &NetworkSpec, seed: u64) -> Result<ModelState> {
    spec.validate()?;
    let mut rng = seeded_rng(seed);
    let mut c = spec.c_in;
    let mut layers = Vec::with_capacity(spec.layers.len());
    for layer in &spec.layers {
        match layer {
            LayerSpec::PointConv { c_out, weight_fn, .. } => {
                let wf = match weight_fn {
                    WeightFnKind::CubicPoly => {
                        if spec.input_kind != DescriptorKind::Offset {
                            return Err(Error::InvalidNetworkConfig(
                                "cubic polynomial weight functions take offset inputs".into(),
                            ));
                        }
                        WeightFnParams::init_cubic(spec.input_dim, spec.c_mid, &mut rng)
                    }
                    WeightFnKind::Mlp { activation } => WeightFnParams::init_mlp(
                        spec.input_kind,
                        spec.input_dim,
                        spec.c_mid,
                        *activation,
                        &mut rng,
                    ),
                };
                layers.push(LayerState::PointConv(PointConvLayerParams::init(
                    c, *c_out, wf, &mut rng,
                )));
                c = *c_out;
            }
            LayerSpec::FullyConnected { c_out } => {
                layers.push(LayerState::FullyConnected {
                    w: glorot_uniform(*c_out, c, &mut rng),
                    b: Array1::zeros(*c_out),
                });
                c = *c_out;
            }
            LayerSpec::Subsample(_) | LayerSpec::GlobalAveragePool => {
                layers.push(LayerState::Stateless);
            }
        }
    }
    let adam_m: Vec<LayerState> = layers.iter().map(LayerState::zeros_like).collect();
    let adam_v = adam_m.clone();
    Ok(ModelState { layers, adam_m, adam_v, step: 0 })
}
