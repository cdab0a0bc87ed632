//! Finite-difference verification through the full network stack.

use ndarray::Array2;
use pointconv_core::conv::{ActivationKind, DescriptorKind};
use pointconv_core::geometry::PointCloud;
use pointconv_core::network::{
    cross_entropy, init_state, network_backward, network_forward_cached, LayerSpec, ModelState,
    NeighborhoodMode, NetworkSpec, SubsampleMode, WeightFnKind,
};
use pointconv_core::rng::seeded_rng;
use rand::Rng;

fn toy_spec(weight_fn: WeightFnKind) -> NetworkSpec {
    NetworkSpec {
        input_dim: 2,
        c_in: 1,
        input_kind: DescriptorKind::Offset,
        c_mid: 3,
        layers: vec![
            LayerSpec::PointConv {
                c_out: 3,
                neighborhood: NeighborhoodMode::Knn { k: 4 },
                weight_fn,
                activation: Some(ActivationKind::ReLU),
            },
            LayerSpec::Subsample(SubsampleMode::Fps { m: 8 }),
            LayerSpec::PointConv {
                c_out: 4,
                neighborhood: NeighborhoodMode::EpsilonBall { epsilon: 0.6, k_cap: 6 },
                weight_fn,
                activation: Some(ActivationKind::ReLU),
            },
            LayerSpec::Subsample(SubsampleMode::Fps { m: 4 }),
            LayerSpec::PointConv {
                c_out: 4,
                neighborhood: NeighborhoodMode::Knn { k: 3 },
                weight_fn,
                activation: Some(ActivationKind::ReLU),
            },
            LayerSpec::PointConv {
                c_out: 4,
                neighborhood: NeighborhoodMode::Knn { k: 3 },
                weight_fn,
                activation: Some(ActivationKind::ReLU),
            },
            LayerSpec::GlobalAveragePool,
            LayerSpec::FullyConnected { c_out: 2 },
        ],
    }
}

fn toy_cloud(seed: u64) -> PointCloud {
    let mut rng = seeded_rng(seed);
    let pts: Vec<[f64; 2]> = (0..16).map(|_| [rng.gen(), rng.gen()]).collect();
    let feats = Array2::from_shape_fn((16, 1), |_| rng.gen::<f64>());
    PointCloud::from_positions_2d(pts).with_features(feats).unwrap()
}

fn loss_of(spec: &NetworkSpec, state: &ModelState, cloud: &PointCloud, label: usize) -> f64 {
    let cache = network_forward_cached(spec, state, cloud, 7).unwrap();
    cross_entropy(&cache.logits, label).0
}

fn check(spec: &NetworkSpec, tol: f64) {
    let cloud = toy_cloud(3);
    let label = 1usize;
    let state = init_state(spec, 11).unwrap();

    let cache = network_forward_cached(spec, &state, &cloud, 7).unwrap();
    let (_, grad_logits) = cross_entropy(&cache.logits, label);
    let mut grads = state.zero_grads();
    network_backward(&state, &cache, &grad_logits, &mut grads).unwrap();

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for layer_idx in 0..state.layers.len() {
        let shapes = state.layers[layer_idx].tensor_shapes();
        for (tensor_idx, shape) in shapes.iter().enumerate() {
            let len: usize = shape.iter().product();
            for i in 0..len {
                let analytic = grads[layer_idx].tensors()[tensor_idx].1[i];
                let mut plus = state.clone();
                plus.layers[layer_idx].tensors_mut()[tensor_idx][i] += h;
                let mut minus = state.clone();
                minus.layers[layer_idx].tensors_mut()[tensor_idx][i] -= h;
                let numeric =
                    (loss_of(spec, &plus, &cloud, label) - loss_of(spec, &minus, &cloud, label))
                        / (2.0 * h);
                let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic - numeric).abs() / denom);
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "checked only {checked} parameters");
    assert!(worst < tol, "worst relative error {worst} over {checked} params");
}

#[test]
fn full_network_gradients_cubic() {
    check(&toy_spec(WeightFnKind::CubicPoly), 1e-4);
}

#[test]
fn full_network_gradients_mlp_relu() {
    check(&toy_spec(WeightFnKind::Mlp { activation: ActivationKind::ReLU }), 1e-4);
}
