//! Network assembly, training, and evaluation.

mod checkpoint;
mod forward;
mod spec;
mod state;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use forward::{network_backward, network_forward, network_forward_cached, ForwardCache};
pub use spec::{
    build_mnist_network, LayerSpec, MnistNeighborhood, MnistNetConfig, MnistSubsample,
    NeighborhoodMode, NetworkSpec, SubsampleMode, WeightFnKind, MNIST_CONV_CHANNELS,
    MNIST_EPSILONS, MNIST_FPS_SIZES,
};
pub use state::{init_state, LayerState, ModelState};
pub use train::{
    argmax, cross_entropy, evaluate, fit, model_sobolev_penalty, train_step, TrainConfig,
};
