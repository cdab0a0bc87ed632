//! The PointConv layer: weight functions, factorized convolution,
//! hand-derived gradients, and the Sobolev penalty.

mod activation;
mod layer;
pub mod params_io;
mod sobolev;
mod weight_fn;

pub use activation::{activation_apply, ActivationKind};
pub use layer::{
    backward_centers, forward_centers, pointconv_backward, pointconv_forward, LayerCache,
    PointConvLayerGrads, PointConvLayerParams,
};
pub use sobolev::sobolev_penalty;
pub use weight_fn::{
    backward_batch as weight_fn_backward_batch, descriptor_rows,
    forward_batch as weight_fn_forward_batch, glorot_uniform, weight_fn_forward, DescriptorKind,
    WeightFnCache, WeightFnGrads, WeightFnParams, MLP_HIDDEN,
};
