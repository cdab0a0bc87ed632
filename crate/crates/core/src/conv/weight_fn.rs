//! Weight functions: the maps from a neighbor descriptor to the `c_mid`
//! convolution weight vector.
//!
//! Two families are supported. The MLP ("WeightNet") is a three-affine-layer
//! perceptron with a selectable activation and a linear output. The cubic
//! polynomial variant is a single coefficient matrix applied to the
//! polynomial feature expansion of the raw offset; it always takes the
//! offset as its input.

use nalgebra::Vector3;
use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conv::activation::ActivationKind;
use crate::descriptors::{vi_descriptor, VI_LEN};
use crate::descriptors::poly;
use crate::error::{Error, Result};
use crate::geometry::{Neighborhood, PointCloud};

/// Hidden widths of the MLP weight function.
pub const MLP_HIDDEN: [usize; 2] = [16, 16];

/// What the weight function receives for each neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DescriptorKind {
    /// The raw coordinate offset (2 or 3 values).
    Offset,
    /// The 8-entry viewpoint-invariant descriptor (3D only).
    Vi,
    /// VI descriptor followed by the raw offset (11 values, 3D only).
    ViOffset,
}

impl DescriptorKind {
    /// Input length for a cloud dimension.
    pub fn input_len(&self, dim: usize) -> usize {
        match self {
            DescriptorKind::Offset => dim,
            DescriptorKind::Vi => VI_LEN,
            DescriptorKind::ViOffset => VI_LEN + 3,
        }
    }
}

/// Parameters of one weight function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightFnParams {
    Mlp {
        input_kind: DescriptorKind,
        activation: ActivationKind,
        /// Three affine layers: `in -> 16 -> 16 -> c_mid`. Weights are
        /// `out x in`; the output layer has no activation.
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
    },
    CubicPoly {
        /// Cloud dimension (2 or 3), fixing the basis length to 10 or 20.
        dim: usize,
        /// Coefficient matrix, `c_mid x basis_len`. Columns follow the
        /// polynomial term order of [`poly::poly_features`].
        theta: Array2<f64>,
    },
}

impl WeightFnParams {
    /// Randomly initialized MLP weight function.
    pub fn init_mlp(
        input_kind: DescriptorKind,
        dim: usize,
        c_mid: usize,
        activation: ActivationKind,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let sizes = [input_kind.input_len(dim), MLP_HIDDEN[0], MLP_HIDDEN[1], c_mid];
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            weights.push(glorot_uniform(w[1], w[0], rng));
            biases.push(Array1::zeros(w[1]));
        }
        WeightFnParams::Mlp { input_kind, activation, weights, biases }
    }

    /// Randomly initialized cubic polynomial weight function.
    pub fn init_cubic(dim: usize, c_mid: usize, rng: &mut ChaCha8Rng) -> Self {
        WeightFnParams::CubicPoly { dim, theta: glorot_uniform(c_mid, poly::basis_len(dim), rng) }
    }

    pub fn input_kind(&self) -> DescriptorKind {
        match self {
            WeightFnParams::Mlp { input_kind, .. } => *input_kind,
            WeightFnParams::CubicPoly { .. } => DescriptorKind::Offset,
        }
    }

    /// Descriptor length the weight function expects.
    pub fn input_len(&self) -> usize {
        match self {
            WeightFnParams::Mlp { weights, .. } => weights[0].ncols(),
            WeightFnParams::CubicPoly { dim, .. } => *dim,
        }
    }

    pub fn c_mid(&self) -> usize {
        match self {
            WeightFnParams::Mlp { weights, .. } => weights.last().expect("three layers").nrows(),
            WeightFnParams::CubicPoly { theta, .. } => theta.nrows(),
        }
    }
}

/// Glorot-uniform matrix in `[-sqrt(6/(fan_in+fan_out)), +...]`.
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
}

/// Evaluate the weight function on a single raw descriptor.
pub fn weight_fn_forward(params: &WeightFnParams, descriptor_in: &[f64]) -> Result<Array1<f64>> {
    let input = ndarray::aview1(descriptor_in).insert_axis(Axis(0)).to_owned();
    let (out, _) = forward_batch(params, &input)?;
    Ok(out.row(0).to_owned())
}

/// Cached intermediates of a batched weight-function forward pass.
#[derive(Debug, Clone, Default)]
pub struct WeightFnCache {
    /// Polynomial feature rows (cubic variant only).
    pub poly: Option<Array2<f64>>,
    /// Post-affine values per hidden layer (rows = descriptors).
    pub pre_acts: Vec<Array2<f64>>,
    /// Post-activation values per hidden layer.
    pub acts: Vec<Array2<f64>>,
}

/// Evaluate the weight function on a batch of raw descriptor rows.
///
/// Returns the `rows x c_mid` output and the cache consumed by
/// [`backward_batch`]. The cubic variant expands each offset row into its
/// polynomial features internally.
pub fn forward_batch(
    params: &WeightFnParams,
    inputs: &Array2<f64>,
) -> Result<(Array2<f64>, WeightFnCache)> {
    if inputs.ncols() != params.input_len() {
        return Err(Error::DimensionMismatch {
            expected: params.input_len(),
            got: inputs.ncols(),
        });
    }
    match params {
        WeightFnParams::CubicPoly { dim, theta } => {
            let phi = poly_rows_from_inputs(inputs, *dim);
            let out = phi.dot(&theta.t());
            Ok((out, WeightFnCache { poly: Some(phi), ..Default::default() }))
        }
        WeightFnParams::Mlp { activation, weights, biases, .. } => {
            let mut cache = WeightFnCache::default();
            let mut x = inputs.clone();
            for (layer, (w, b)) in weights.iter().zip(biases).enumerate() {
                let mut z = x.dot(&w.t());
                z += &b.view().insert_axis(Axis(0));
                if layer + 1 < weights.len() {
                    let a = z.mapv(|v| activation.eval(v));
                    cache.pre_acts.push(z);
                    cache.acts.push(a.clone());
                    x = a;
                } else {
                    x = z;
                }
            }
            Ok((x, cache))
        }
    }
}

/// Gradients of the weight-function parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFnGrads {
    Mlp { weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>> },
    CubicPoly { theta: Array2<f64> },
}

/// Backpropagate `grad_out` (rows = descriptors) through the weight function.
///
/// Descriptors are geometric inputs, not parameters, so no input gradient is
/// produced.
pub fn backward_batch(
    params: &WeightFnParams,
    inputs: &Array2<f64>,
    cache: &WeightFnCache,
    grad_out: &Array2<f64>,
) -> WeightFnGrads {
    match params {
        WeightFnParams::CubicPoly { .. } => {
            let phi = cache.poly.as_ref().expect("cubic cache holds poly rows");
            WeightFnGrads::CubicPoly { theta: grad_out.t().dot(phi) }
        }
        WeightFnParams::Mlp { activation, weights, .. } => {
            let n_layers = weights.len();
            let mut d_weights = vec![Array2::zeros((0, 0)); n_layers];
            let mut d_biases = vec![Array1::zeros(0); n_layers];
            let mut upstream = grad_out.clone();
            for layer in (0..n_layers).rev() {
                let layer_in: &Array2<f64> =
                    if layer == 0 { inputs } else { &cache.acts[layer - 1] };
                d_weights[layer] = upstream.t().dot(layer_in);
                d_biases[layer] = upstream.sum_axis(Axis(0));
                if layer > 0 {
                    let mut next = upstream.dot(&weights[layer]);
                    next.zip_mut_with(&cache.pre_acts[layer - 1], |g, &z| {
                        *g *= activation.grad(z)
                    });
                    upstream = next;
                }
            }
            WeightFnGrads::Mlp { weights: d_weights, biases: d_biases }
        }
    }
}

/// Assemble the per-neighbor weight-function input rows for a neighborhood.
///
/// For `Offset` the rows are the raw offsets truncated to the cloud
/// dimension. For `Vi` and `ViOffset` the cloud must be 3D with normals; the
/// degenerate self-pair (zero offset) maps to the constant descriptor
/// `[1, 0, 0, 0, 0, 0, 0, 0]`, which is rotation and scale invariant.
pub fn descriptor_rows(
    cloud: &PointCloud,
    nbhd: &Neighborhood,
    kind: DescriptorKind,
) -> Result<Array2<f64>> {
    let dim = cloud.dim();
    let width = kind.input_len(dim);
    let mut rows = Array2::zeros((nbhd.len(), width));
    match kind {
        DescriptorKind::Offset => {
            for (r, off) in nbhd.offsets.iter().enumerate() {
                for a in 0..dim {
                    rows[[r, a]] = off[a];
                }
            }
        }
        DescriptorKind::Vi | DescriptorKind::ViOffset => {
            if dim != 3 {
                return Err(Error::DimensionMismatch { expected: 3, got: dim });
            }
            let normals = cloud
                .normals()
                .ok_or_else(|| Error::MisalignedArrays("VI input needs normals".into()))?;
            let p_mu = cloud.position(nbhd.center);
            let n_mu = normals[nbhd.center];
            for (r, (&j, off)) in nbhd.neighbors.iter().zip(&nbhd.offsets).enumerate() {
                let beta = if off.norm_squared() == 0.0 {
                    [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
                } else {
                    vi_descriptor(&p_mu, &n_mu, &cloud.position(j), &normals[j])?.beta
                };
                rows.row_mut(r).slice_mut(ndarray::s![..VI_LEN]).assign(&ndarray::aview1(&beta));
                if kind == DescriptorKind::ViOffset {
                    for a in 0..3 {
                        rows[[r, VI_LEN + a]] = off[a];
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn poly_rows_from_inputs(inputs: &Array2<f64>, dim: usize) -> Array2<f64> {
    let len = poly::basis_len(dim);
    let mut rows = Array2::zeros((inputs.nrows(), len));
    for (r, row) in inputs.rows().into_iter().enumerate() {
        let off = Vector3::new(row[0], row[1], if dim == 3 { row[2] } else { 0.0 });
        poly::poly_features_into(&off, dim, rows.row_mut(r).as_slice_mut().expect("row-major"));
    }
    rows
}
