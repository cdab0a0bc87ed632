//! Probe: 50 Adam steps on a fixed 10-example batch should overfit.
use pointconv_core::harness::{Dataset, RobustnessProtocol};
use pointconv_core::network::{
    build_mnist_network, init_state, train_step, MnistNeighborhood, MnistNetConfig,
    MnistSubsample, TrainConfig, WeightFnKind,
};

fn main() {
    let dataset = Dataset::synthetic(10, 0, 0);
    let protocol = RobustnessProtocol::scale_preset();
    let cfg = TrainConfig { seed: 1, sobolev_lambda: 0.0, ..TrainConfig::default() };

    let net = MnistNetConfig {
        neighborhood: MnistNeighborhood::EpsilonBall { k_cap: 16 },
        weight_fn: WeightFnKind::CubicPoly,
        subsample: MnistSubsample::Fps,
        c_mid: 16,
    };
    let spec = build_mnist_network(&net).unwrap();
    let mut state = init_state(&spec, 7).unwrap();

    let batch: Vec<_> = dataset
        .train
        .iter()
        .map(|(img, lbl)| (protocol.variant_cloud(img, 28, None).unwrap(), *lbl as usize))
        .collect();

    for step in 0..50 {
        let loss = train_step(&spec, &mut state, &batch, &cfg).unwrap();
        if step % 5 == 0 || step == 49 {
            println!("step {step}: loss {loss:.5}");
        }
    }
}
