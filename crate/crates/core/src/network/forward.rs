//! Forward and backward passes through a network.
//!
//! The forward pass threads per-point features through the layer stack.
//! A subsampling layer only picks the next conv's centers; that conv then
//! gathers features from the full pre-subsample cloud, and the cloud shrinks
//! to the chosen centers afterwards. ε-ball neighbor subselection draws from
//! a stream derived from `(seed, layer, center)`, so a forward pass is a
//! pure function of `(spec, state, cloud, seed)`.

use ndarray::{Array1, Array2, Axis};

use crate::conv::{
    backward_centers, descriptor_rows, forward_centers, ActivationKind, LayerCache,
    PointConvLayerParams,
};
use crate::error::{Error, Result};
use crate::geometry::{
    build_index, epsilon_ball_query, farthest_point_sampling, knn_query, pc2d_keep_indices,
    Neighborhood, PointCloud,
};
use crate::network::spec::{LayerSpec, NeighborhoodMode, NetworkSpec, SubsampleMode};
use crate::network::state::{LayerState, ModelState};
use crate::rng::derive_seed;

/// Everything the backward pass needs from one forward pass.
pub struct ForwardCache {
    records: Vec<LayerRecord>,
    pub logits: Array1<f64>,
}

enum LayerRecord {
    PointConv {
        nbhds: Vec<Neighborhood>,
        cache: LayerCache,
        /// Input features the layer gathered from (pre-subsample rows).
        input_feats: Array2<f64>,
        /// Layer outputs before the post-activation.
        preact: Array2<f64>,
        activation: Option<ActivationKind>,
    },
    Subsample,
    Gap {
        n_points: usize,
    },
    FullyConnected {
        input: Array1<f64>,
    },
}

/// Forward pass returning the logits only.
pub fn network_forward(
    spec: &NetworkSpec,
    state: &ModelState,
    cloud: &PointCloud,
    seed: u64,
) -> Result<Array1<f64>> {
    Ok(network_forward_cached(spec, state, cloud, seed)?.logits)
}

/// Forward pass returning the logits plus the backward cache.
pub fn network_forward_cached(
    spec: &NetworkSpec,
    state: &ModelState,
    cloud: &PointCloud,
    seed: u64,
) -> Result<ForwardCache> {
    if cloud.dim() != spec.input_dim {
        return Err(Error::DimensionMismatch { expected: spec.input_dim, got: cloud.dim() });
    }
    let mut feats: Array2<f64> = match cloud.features() {
        Some(f) if f.ncols() == spec.c_in => f.clone(),
        Some(f) => {
            return Err(Error::DimensionMismatch { expected: spec.c_in, got: f.ncols() });
        }
        None => return Err(Error::MisalignedArrays("input cloud has no features".into())),
    };

    // Geometry of the current cloud; features live in `feats`.
    let mut geom = cloud.clone();
    let mut index = build_index(&geom)?;
    let mut raster_dims = crate::descriptors::infer_raster_dims(&geom);
    let mut pending_centers: Option<Vec<usize>> = None;

    let mut records = Vec::with_capacity(spec.layers.len());
    let mut gap_output: Option<Array1<f64>> = None;

    for (layer_idx, (layer, params)) in spec.layers.iter().zip(&state.layers).enumerate() {
        match (layer, params) {
            (LayerSpec::Subsample(mode), _) => {
                let centers = match mode {
                    // Inputs smaller than the preset FPS size (e.g. 10x10
                    // test images) keep every point.
                    SubsampleMode::Fps { m } => {
                        farthest_point_sampling(&geom, (*m).min(geom.len()), 0)?
                    }
                    SubsampleMode::Pc2d => {
                        let (h, w) = raster_dims.ok_or_else(|| {
                            Error::InvalidNetworkConfig(
                                "PC-2D subsampling needs a raster-grid cloud".into(),
                            )
                        })?;
                        let kept = pc2d_keep_indices(&geom, w, h)?;
                        raster_dims = Some((h / 2, w / 2));
                        kept
                    }
                };
                pending_centers = Some(centers);
                records.push(LayerRecord::Subsample);
            }
            (
                LayerSpec::PointConv { neighborhood, activation, .. },
                LayerState::PointConv(conv),
            ) => {
                let centers: Vec<usize> = match pending_centers.take() {
                    Some(c) => c,
                    None => (0..geom.len()).collect(),
                };
                let nbhds =
                    build_neighborhoods(&index, &centers, neighborhood, seed, layer_idx as u64)?;
                let wf_inputs = assemble_inputs(&geom, &nbhds, conv)?;
                let (preact, cache) = forward_centers(conv, &nbhds, &feats, wf_inputs)?;

                let out = match activation {
                    Some(act) => preact.mapv(|v| act.eval(v)),
                    None => preact.clone(),
                };
                records.push(LayerRecord::PointConv {
                    nbhds,
                    cache,
                    input_feats: feats,
                    preact,
                    activation: *activation,
                });
                feats = out;

                if centers.len() != geom.len() {
                    geom = geom.select(&centers);
                    index = build_index(&geom)?;
                }
            }
            (LayerSpec::GlobalAveragePool, _) => {
                let n = feats.nrows();
                let pooled = feats.mean_axis(Axis(0)).expect("non-empty cloud");
                records.push(LayerRecord::Gap { n_points: n });
                gap_output = Some(pooled.clone());
                feats = pooled.insert_axis(Axis(0));
            }
            (LayerSpec::FullyConnected { .. }, LayerState::FullyConnected { w, b }) => {
                let input = feats.row(0).to_owned();
                let out = w.dot(&input) + b;
                records.push(LayerRecord::FullyConnected { input });
                feats = out.insert_axis(Axis(0));
            }
            _ => {
                return Err(Error::InvalidNetworkConfig(
                    "layer spec and state are out of step".into(),
                ))
            }
        }
    }
    debug_assert!(gap_output.is_some());

    Ok(ForwardCache { records, logits: feats.row(0).to_owned() })
}

/// Backward pass: fills `grads` (a zero accumulator shaped like the
/// parameters) with d(loss)/d(params) given d(loss)/d(logits).
pub fn network_backward(
    state: &ModelState,
    cache: &ForwardCache,
    grad_logits: &Array1<f64>,
    grads: &mut [LayerState],
) -> Result<()> {
    let mut g: Array2<f64> = grad_logits.view().insert_axis(Axis(0)).to_owned();

    for (layer_idx, record) in cache.records.iter().enumerate().rev() {
        match (record, &state.layers[layer_idx]) {
            (LayerRecord::FullyConnected { input }, LayerState::FullyConnected { w, .. }) => {
                let g_row = g.row(0).to_owned();
                let LayerState::FullyConnected { w: gw, b: gb } = &mut grads[layer_idx] else {
                    return Err(Error::InvalidNetworkConfig("gradient shape mismatch".into()));
                };
                *gw += &outer(&g_row, input);
                *gb += &g_row;
                g = w.t().dot(&g_row).insert_axis(Axis(0)).to_owned();
            }
            (LayerRecord::Gap { n_points }, _) => {
                let share = g.row(0).mapv(|v| v / *n_points as f64);
                let mut spread = Array2::zeros((*n_points, share.len()));
                for mut row in spread.rows_mut() {
                    row.assign(&share);
                }
                g = spread;
            }
            (
                LayerRecord::PointConv { nbhds, cache: lc, input_feats, preact, activation },
                LayerState::PointConv(conv),
            ) => {
                if let Some(act) = activation {
                    g.zip_mut_with(preact, |gv, &z| *gv *= act.grad(z));
                }
                let (layer_grads, g_src) =
                    backward_centers(conv, nbhds, input_feats, lc, &g)?;
                grads[layer_idx].accumulate_conv(&layer_grads);
                g = g_src;
            }
            (LayerRecord::Subsample, _) => {}
            _ => {
                return Err(Error::InvalidNetworkConfig(
                    "layer record and state are out of step".into(),
                ))
            }
        }
    }
    Ok(())
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.len(), b.len()));
    for (i, &av) in a.iter().enumerate() {
        for (j, &bv) in b.iter().enumerate() {
            out[[i, j]] = av * bv;
        }
    }
    out
}

fn build_neighborhoods(
    index: &crate::geometry::SpatialIndex,
    centers: &[usize],
    mode: &NeighborhoodMode,
    seed: u64,
    layer_idx: u64,
) -> Result<Vec<Neighborhood>> {
    centers
        .iter()
        .map(|&c| match mode {
            NeighborhoodMode::Knn { k } => knn_query(index, c, (*k).min(index.len())),
            NeighborhoodMode::EpsilonBall { epsilon, k_cap } => {
                let sub_seed = derive_seed(seed, &[layer_idx, c as u64]);
                epsilon_ball_query(index, c, *epsilon, *k_cap, sub_seed)
            }
        })
        .collect()
}

/// Stack the weight-function input rows of every neighborhood.
fn assemble_inputs(
    geom: &PointCloud,
    nbhds: &[Neighborhood],
    conv: &PointConvLayerParams,
) -> Result<Array2<f64>> {
    let kind = conv.weight_fn.input_kind();
    let width = kind.input_len(geom.dim());
    let total: usize = nbhds.iter().map(Neighborhood::len).sum();
    let mut rows = Array2::zeros((total, width));
    let mut at = 0;
    for nbhd in nbhds {
        let block = descriptor_rows(geom, nbhd, kind)?;
        rows.slice_mut(ndarray::s![at..at + nbhd.len(), ..]).assign(&block);
        at += nbhd.len();
    }
    Ok(rows)
}
