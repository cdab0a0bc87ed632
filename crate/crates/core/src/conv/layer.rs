//! The PointConv layer in factorized form.
//!
//! The layer computes, per center,
//! `out = H · vec(Σ_j S_j · w(d_j) ⊗ f_j) + bias`,
//! where `w` is the weight function, `d_j` the neighbor descriptor, `f_j`
//! the neighbor feature row and `S_j` its normalizer. This equals the full
//! continuous convolution with the materialized kernel
//! `W(d)[o][q] = Σ_p H[o, p·c_in + q] · w(d)[p]`, without ever storing `W`.
//!
//! `vec` is the row-major flattening of the `c_mid x c_in` moment matrix.

use ndarray::{Array1, Array2, Axis};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv::weight_fn::{
    self, backward_batch as wf_backward, forward_batch as wf_forward, WeightFnCache,
    WeightFnGrads, WeightFnParams,
};
use crate::error::{Error, Result};
use crate::geometry::Neighborhood;

/// Parameters of one PointConv layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConvLayerParams {
    pub weight_fn: WeightFnParams,
    /// Linear map from the flattened moment matrix, `c_out x (c_mid·c_in)`.
    pub h: Array2<f64>,
    pub bias: Array1<f64>,
    pub c_in: usize,
    pub c_out: usize,
    pub c_mid: usize,
}

impl PointConvLayerParams {
    /// Random Glorot-uniform layer with zero bias.
    pub fn init(
        c_in: usize,
        c_out: usize,
        weight_fn: WeightFnParams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let c_mid = weight_fn.c_mid();
        Self {
            weight_fn,
            h: weight_fn::glorot_uniform(c_out, c_mid * c_in, rng),
            bias: Array1::zeros(c_out),
            c_in,
            c_out,
            c_mid,
        }
    }
}

/// Gradients of a PointConv layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConvLayerGrads {
    pub weight_fn: WeightFnGrads,
    pub h: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Forward/backward cache for one batched layer application.
pub struct LayerCache {
    /// Raw weight-function inputs, one row per (center, neighbor) pair.
    pub wf_inputs: Array2<f64>,
    wf_cache: WeightFnCache,
    /// Weight-function outputs, `total_neighbors x c_mid`.
    w_all: Array2<f64>,
    /// Flattened moment matrices, `n_centers x (c_mid·c_in)`.
    m_stack: Array2<f64>,
    /// Start offset of each center's rows in `wf_inputs` (with final end).
    seg: Vec<usize>,
}

/// Apply the layer to a batch of centers.
///
/// `source_feats` holds one feature row per point of the cloud the
/// neighborhoods index into; `wf_inputs` holds the pre-assembled descriptor
/// rows for all neighborhoods, concatenated in order.
pub fn forward_centers(
    layer: &PointConvLayerParams,
    nbhds: &[Neighborhood],
    source_feats: &Array2<f64>,
    wf_inputs: Array2<f64>,
) -> Result<(Array2<f64>, LayerCache)> {
    let total: usize = nbhds.iter().map(Neighborhood::len).sum();
    if wf_inputs.nrows() != total {
        return Err(Error::MisalignedArrays(format!(
            "{} descriptor rows for {} neighbors",
            wf_inputs.nrows(),
            total
        )));
    }
    if source_feats.ncols() != layer.c_in {
        return Err(Error::DimensionMismatch { expected: layer.c_in, got: source_feats.ncols() });
    }

    let (w_all, wf_cache) = wf_forward(&layer.weight_fn, &wf_inputs)?;
    let (c_mid, c_in) = (layer.c_mid, layer.c_in);

    let mut seg = Vec::with_capacity(nbhds.len() + 1);
    let mut m_stack = Array2::zeros((nbhds.len(), c_mid * c_in));
    {
        let w_flat = w_all.as_slice().expect("row-major");
        let f_flat = source_feats.as_slice().expect("row-major");
        let m_flat = m_stack.as_slice_mut().expect("row-major");
        let mut row = 0usize;
        for (c, nbhd) in nbhds.iter().enumerate() {
            seg.push(row);
            if nbhd.neighbors.len() != nbhd.normalizer.len() {
                return Err(Error::MisalignedArrays("normalizer length".into()));
            }
            let m_row = &mut m_flat[c * c_mid * c_in..(c + 1) * c_mid * c_in];
            for (&j, &s) in nbhd.neighbors.iter().zip(&nbhd.normalizer) {
                let w_row = &w_flat[row * c_mid..(row + 1) * c_mid];
                let f_row = &f_flat[j * c_in..(j + 1) * c_in];
                for p in 0..c_mid {
                    let coeff = s * w_row[p];
                    let dst = &mut m_row[p * c_in..(p + 1) * c_in];
                    for (d, &f) in dst.iter_mut().zip(f_row) {
                        *d += coeff * f;
                    }
                }
                row += 1;
            }
        }
        seg.push(row);
    }

    let mut out = m_stack.dot(&layer.h.t());
    out += &layer.bias.view().insert_axis(Axis(0));
    Ok((out, LayerCache { wf_inputs, wf_cache, w_all, m_stack, seg }))
}

/// Backpropagate through a batched layer application.
///
/// Returns the parameter gradients and the gradient w.r.t. `source_feats`
/// (scatter-added over shared neighbors).
pub fn backward_centers(
    layer: &PointConvLayerParams,
    nbhds: &[Neighborhood],
    source_feats: &Array2<f64>,
    cache: &LayerCache,
    grad_out: &Array2<f64>,
) -> Result<(PointConvLayerGrads, Array2<f64>)> {
    if grad_out.nrows() != nbhds.len() || grad_out.ncols() != layer.c_out {
        return Err(Error::MisalignedArrays("grad_out shape".into()));
    }
    let (c_mid, c_in) = (layer.c_mid, layer.c_in);

    let grad_bias = grad_out.sum_axis(Axis(0));
    let grad_h = grad_out.t().dot(&cache.m_stack);
    let g_m = grad_out.dot(&layer.h);

    let mut grad_w_all = Array2::zeros((cache.w_all.nrows(), c_mid));
    let mut grad_src = Array2::zeros(source_feats.raw_dim());
    {
        let gm_flat = g_m.as_slice().expect("row-major");
        let f_flat = source_feats.as_slice().expect("row-major");
        let w_flat = cache.w_all.as_slice().expect("row-major");
        let gw_flat = grad_w_all.as_slice_mut().expect("row-major");
        let gf_flat = grad_src.as_slice_mut().expect("row-major");
        for (c, nbhd) in nbhds.iter().enumerate() {
            let gm_row = &gm_flat[c * c_mid * c_in..(c + 1) * c_mid * c_in];
            let mut row = cache.seg[c];
            for (&j, &s) in nbhd.neighbors.iter().zip(&nbhd.normalizer) {
                let f_row = &f_flat[j * c_in..(j + 1) * c_in];
                let w_row = &w_flat[row * c_mid..(row + 1) * c_mid];
                let gw_row = &mut gw_flat[row * c_mid..(row + 1) * c_mid];
                let gf_row = &mut gf_flat[j * c_in..(j + 1) * c_in];
                for p in 0..c_mid {
                    let gm_p = &gm_row[p * c_in..(p + 1) * c_in];
                    let mut dot = 0.0;
                    let coeff = s * w_row[p];
                    for q in 0..c_in {
                        dot += gm_p[q] * f_row[q];
                        gf_row[q] += coeff * gm_p[q];
                    }
                    gw_row[p] = s * dot;
                }
                row += 1;
            }
        }
    }

    let wf_grads = wf_backward(&layer.weight_fn, &cache.wf_inputs, &cache.wf_cache, &grad_w_all);
    Ok((PointConvLayerGrads { weight_fn: wf_grads, h: grad_h, bias: grad_bias }, grad_src))
}

/// Single-center convolution per the factorized definition.
///
/// `feats` and `descriptors` hold one row per neighborhood member, aligned
/// with `nbhd.neighbors`.
pub fn pointconv_forward(
    layer: &PointConvLayerParams,
    nbhd: &Neighborhood,
    feats: &Array2<f64>,
    descriptors: &Array2<f64>,
) -> Result<Array1<f64>> {
    let local = local_neighborhood(nbhd, feats)?;
    let (out, _) = forward_centers(layer, &[local], feats, descriptors.clone())?;
    Ok(out.row(0).to_owned())
}

/// Gradients of a single-center convolution.
///
/// Returns the parameter gradients and the gradient w.r.t. each neighbor's
/// feature row.
pub fn pointconv_backward(
    layer: &PointConvLayerParams,
    nbhd: &Neighborhood,
    feats: &Array2<f64>,
    descriptors: &Array2<f64>,
    grad_out: &Array1<f64>,
) -> Result<(PointConvLayerGrads, Array2<f64>)> {
    let local = local_neighborhood(nbhd, feats)?;
    let nbhds = [local];
    let (_, cache) = forward_centers(layer, &nbhds, feats, descriptors.clone())?;
    let g = grad_out.view().insert_axis(Axis(0)).to_owned();
    backward_centers(layer, &nbhds, feats, &cache, &g)
}

/// Re-index a neighborhood so its feature rows are `0..len`, preserving
/// offsets and normalizers.
fn local_neighborhood(nbhd: &Neighborhood, feats: &Array2<f64>) -> Result<Neighborhood> {
    if feats.nrows() != nbhd.len() {
        return Err(Error::MisalignedArrays(format!(
            "{} feature rows for {} neighbors",
            feats.nrows(),
            nbhd.len()
        )));
    }
    Ok(Neighborhood {
        kind: nbhd.kind,
        center: 0,
        neighbors: (0..nbhd.len()).collect(),
        offsets: nbhd.offsets.clone(),
        normalizer: nbhd.normalizer.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::activation::ActivationKind;
    use crate::conv::weight_fn::DescriptorKind;
    use crate::geometry::NeighborhoodKind;
    use crate::rng::seeded_rng;
    use nalgebra::Vector3;
    use ndarray::array;

    fn toy_neighborhood(n: usize) -> Neighborhood {
        Neighborhood {
            kind: NeighborhoodKind::EpsilonBall,
            center: 0,
            neighbors: (0..n).collect(),
            offsets: (0..n)
                .map(|j| Vector3::new(j as f64 * 0.1, -(j as f64) * 0.05, 0.0))
                .collect(),
            normalizer: vec![1.0 / n as f64; n],
        }
    }

    fn constant_weight_layer() -> PointConvLayerParams {
        // c_in = c_out = c_mid = 1, H = 1, bias = 0, w ≡ 1.
        let mut theta = Array2::zeros((1, crate::descriptors::POLY_LEN_2D));
        theta[[0, crate::descriptors::POLY_LEN_2D - 1]] = 1.0;
        PointConvLayerParams {
            weight_fn: WeightFnParams::CubicPoly { dim: 2, theta },
            h: array![[1.0]],
            bias: array![0.0],
            c_in: 1,
            c_out: 1,
            c_mid: 1,
        }
    }

    #[test]
    fn mean_of_constant_features_is_identity() {
        let layer = constant_weight_layer();
        let nbhd = toy_neighborhood(5);
        let feats = Array2::from_elem((5, 1), 3.25);
        let mut rows = Array2::zeros((5, 2));
        for (r, off) in nbhd.offsets.iter().enumerate() {
            rows[[r, 0]] = off.x;
            rows[[r, 1]] = off.y;
        }
        let out = pointconv_forward(&layer, &nbhd, &feats, &rows).unwrap();
        assert!((out[0] - 3.25).abs() < 1e-12);
    }

    #[test]
    fn single_neighbor_hand_expansion() {
        // w(desc) = 2 via constant column, feat = 3, normalizer 1, H = 1.
        let mut layer = constant_weight_layer();
        if let WeightFnParams::CubicPoly { theta, .. } = &mut layer.weight_fn {
            theta[[0, crate::descriptors::POLY_LEN_2D - 1]] = 2.0;
        }
        let nbhd = Neighborhood {
            kind: NeighborhoodKind::Knn,
            center: 0,
            neighbors: vec![0],
            offsets: vec![Vector3::new(0.2, 0.1, 0.0)],
            normalizer: vec![1.0],
        };
        let feats = array![[3.0]];
        let rows = array![[0.2, 0.1]];
        let out = pointconv_forward(&layer, &nbhd, &feats, &rows).unwrap();
        assert!((out[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn misaligned_arrays_error() {
        let layer = constant_weight_layer();
        let nbhd = toy_neighborhood(4);
        let feats = Array2::zeros((3, 1));
        let rows = Array2::zeros((4, 2));
        assert!(pointconv_forward(&layer, &nbhd, &feats, &rows).is_err());
    }

    #[test]
    fn zero_upstream_gradient_zeroes_everything() {
        let mut rng = seeded_rng(9);
        let wf = WeightFnParams::init_mlp(DescriptorKind::Offset, 2, 3, ActivationKind::SeLU, &mut rng);
        let layer = PointConvLayerParams::init(2, 4, wf, &mut rng);
        let nbhd = toy_neighborhood(5);
        let feats = Array2::from_shape_fn((5, 2), |_| 0.3);
        let mut rows = Array2::zeros((5, 2));
        for (r, off) in nbhd.offsets.iter().enumerate() {
            rows[[r, 0]] = off.x;
            rows[[r, 1]] = off.y;
        }
        let (grads, grad_feats) =
            pointconv_backward(&layer, &nbhd, &feats, &rows, &Array1::zeros(4)).unwrap();
        assert!(grad_feats.iter().all(|&g| g == 0.0));
        assert!(grads.h.iter().all(|&g| g == 0.0));
        assert!(grads.bias.iter().all(|&g| g == 0.0));
        if let WeightFnGrads::Mlp { weights, biases } = grads.weight_fn {
            assert!(weights.iter().all(|w| w.iter().all(|&g| g == 0.0)));
            assert!(biases.iter().all(|b| b.iter().all(|&g| g == 0.0)));
        } else {
            panic!("expected MLP grads");
        }
    }

    #[test]
    fn bias_gradient_is_upstream_gradient() {
        let mut rng = seeded_rng(10);
        let wf = WeightFnParams::init_cubic(2, 3, &mut rng);
        let layer = PointConvLayerParams::init(2, 4, wf, &mut rng);
        let nbhd = toy_neighborhood(5);
        let feats = Array2::from_elem((5, 2), 0.7);
        let mut rows = Array2::zeros((5, 2));
        for (r, off) in nbhd.offsets.iter().enumerate() {
            rows[[r, 0]] = off.x;
            rows[[r, 1]] = off.y;
        }
        let g = array![0.5, -1.5, 2.0, 0.25];
        let (grads, _) = pointconv_backward(&layer, &nbhd, &feats, &rows, &g).unwrap();
        assert_eq!(grads.bias, g);
    }
}
