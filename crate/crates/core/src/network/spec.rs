//! Network architecture descriptions and the MNIST preset.

use serde::{Deserialize, Serialize};

use crate::conv::{ActivationKind, DescriptorKind};
use crate::error::{Error, Result};

/// Per-layer ε values of the MNIST preset (Conv1..Conv4).
pub const MNIST_EPSILONS: [f64; 4] = [0.1, 0.2, 0.5, 0.5];
/// FPS output sizes of the MNIST preset (Subsampling1, Subsampling2).
pub const MNIST_FPS_SIZES: [usize; 2] = [196, 49];
/// Conv output channels of the MNIST preset.
pub const MNIST_CONV_CHANNELS: [usize; 4] = [64, 128, 128, 128];

/// How a conv layer selects neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NeighborhoodMode {
    Knn { k: usize },
    EpsilonBall { epsilon: f64, k_cap: usize },
}

/// Which weight-function family a conv layer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightFnKind {
    Mlp { activation: ActivationKind },
    CubicPoly,
}

/// How a subsampling layer picks the surviving points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsampleMode {
    /// Farthest point sampling to `m` points, started at index 0.
    Fps { m: usize },
    /// One point per 2x2 raster window (raster-derived clouds only).
    Pc2d,
}

/// One layer of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LayerSpec {
    PointConv {
        c_out: usize,
        neighborhood: NeighborhoodMode,
        weight_fn: WeightFnKind,
        /// Activation applied to the layer output (the preset uses ReLU).
        activation: Option<ActivationKind>,
    },
    Subsample(SubsampleMode),
    GlobalAveragePool,
    FullyConnected { c_out: usize },
}

/// A full network: input contract plus the layer stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Cloud dimension the network consumes (2 or 3).
    pub input_dim: usize,
    /// Input feature channels per point.
    pub c_in: usize,
    /// Weight-function input: offsets, VI, or VI+offset.
    pub input_kind: DescriptorKind,
    /// Width of the weight-function output (the factorization rank).
    pub c_mid: usize,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Check the structural invariants.
    ///
    /// Exactly one global average pool, followed only by fully connected
    /// layers; every subsample is consumed by a following conv; cubic
    /// weight functions require offset inputs; VI inputs require 3D.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim != 2 && self.input_dim != 3 {
            return Err(Error::InvalidNetworkConfig(format!(
                "input_dim must be 2 or 3, got {}",
                self.input_dim
            )));
        }
        if self.input_kind != DescriptorKind::Offset && self.input_dim != 3 {
            return Err(Error::InvalidNetworkConfig(
                "VI descriptors require 3D input".into(),
            ));
        }
        if self.c_mid == 0 || self.c_in == 0 {
            return Err(Error::InvalidNetworkConfig("zero channel width".into()));
        }

        let gap_count = self
            .layers
            .iter()
            .filter(|l| matches!(l, LayerSpec::GlobalAveragePool))
            .count();
        if gap_count != 1 {
            return Err(Error::InvalidNetworkConfig(format!(
                "expected exactly one global average pool, found {gap_count}"
            )));
        }

        let mut seen_gap = false;
        let mut pending_subsample = false;
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                LayerSpec::PointConv { c_out, weight_fn, .. } => {
                    if seen_gap {
                        return Err(Error::InvalidNetworkConfig(
                            "conv layer after global average pool".into(),
                        ));
                    }
                    if *c_out == 0 {
                        return Err(Error::InvalidNetworkConfig(format!("layer {i}: c_out = 0")));
                    }
                    if matches!(weight_fn, WeightFnKind::CubicPoly)
                        && self.input_kind != DescriptorKind::Offset
                    {
                        return Err(Error::InvalidNetworkConfig(
                            "cubic polynomial weight functions take offset inputs".into(),
                        ));
                    }
                    pending_subsample = false;
                }
                LayerSpec::Subsample(_) => {
                    if seen_gap || pending_subsample {
                        return Err(Error::InvalidNetworkConfig(
                            "subsample must be followed by a conv layer".into(),
                        ));
                    }
                    pending_subsample = true;
                }
                LayerSpec::GlobalAveragePool => {
                    if pending_subsample {
                        return Err(Error::InvalidNetworkConfig(
                            "subsample must be followed by a conv layer".into(),
                        ));
                    }
                    seen_gap = true;
                }
                LayerSpec::FullyConnected { c_out } => {
                    if !seen_gap {
                        return Err(Error::InvalidNetworkConfig(
                            "fully connected layers come after the global average pool".into(),
                        ));
                    }
                    if *c_out == 0 {
                        return Err(Error::InvalidNetworkConfig(format!("layer {i}: c_out = 0")));
                    }
                }
            }
        }
        if !seen_gap {
            return Err(Error::InvalidNetworkConfig("missing global average pool".into()));
        }
        match self.layers.last() {
            Some(LayerSpec::FullyConnected { .. }) => Ok(()),
            _ => Err(Error::InvalidNetworkConfig(
                "network must end in a fully connected layer".into(),
            )),
        }
    }

    /// Output width of the final layer.
    pub fn output_len(&self) -> usize {
        match self.layers.last() {
            Some(LayerSpec::FullyConnected { c_out }) => *c_out,
            _ => 0,
        }
    }
}

/// Neighborhood choice for the MNIST preset; ε values are fixed per layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MnistNeighborhood {
    Knn { k: usize },
    EpsilonBall { k_cap: usize },
}

/// Configuration of the 4-conv MNIST classification network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnistNetConfig {
    pub neighborhood: MnistNeighborhood,
    pub weight_fn: WeightFnKind,
    #[serde(default = "default_subsample")]
    pub subsample: MnistSubsample,
    #[serde(default = "default_c_mid")]
    pub c_mid: usize,
}

/// Subsampling family used by both subsampling layers of the preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MnistSubsample {
    Fps,
    Pc2d,
}

fn default_subsample() -> MnistSubsample {
    MnistSubsample::Fps
}

fn default_c_mid() -> usize {
    16
}

/// Build the 4-conv MNIST architecture:
/// Conv1(64) → Subsample(196) → Conv2(128) → Subsample(49) → Conv3(128) →
/// Conv4(128) → GlobalAveragePool → FC(10), ReLU after every conv. In ε-ball
/// mode the per-layer ε values are 1/10, 1/5, 1/2, 1/2.
pub fn build_mnist_network(cfg: &MnistNetConfig) -> Result<NetworkSpec> {
    let neighborhood = |conv_idx: usize| match cfg.neighborhood {
        MnistNeighborhood::Knn { k } => NeighborhoodMode::Knn { k },
        MnistNeighborhood::EpsilonBall { k_cap } => NeighborhoodMode::EpsilonBall {
            epsilon: MNIST_EPSILONS[conv_idx],
            k_cap,
        },
    };
    let conv = |conv_idx: usize| LayerSpec::PointConv {
        c_out: MNIST_CONV_CHANNELS[conv_idx],
        neighborhood: neighborhood(conv_idx),
        weight_fn: cfg.weight_fn,
        activation: Some(ActivationKind::ReLU),
    };
    let subsample = |stage: usize| match cfg.subsample {
        MnistSubsample::Fps => LayerSpec::Subsample(SubsampleMode::Fps { m: MNIST_FPS_SIZES[stage] }),
        MnistSubsample::Pc2d => LayerSpec::Subsample(SubsampleMode::Pc2d),
    };

    let spec = NetworkSpec {
        input_dim: 2,
        c_in: 1,
        input_kind: DescriptorKind::Offset,
        c_mid: cfg.c_mid,
        layers: vec![
            conv(0),
            subsample(0),
            conv(1),
            subsample(1),
            conv(2),
            conv(3),
            LayerSpec::GlobalAveragePool,
            LayerSpec::FullyConnected { c_out: 10 },
        ],
    };
    spec.validate()?;
    Ok(spec)
}
