//! Small-scale learnability probe for the synthetic corpus.
use std::time::Instant;

use pointconv_core::harness::{Dataset, RobustnessProtocol};
use pointconv_core::network::{
    build_mnist_network, evaluate, fit, init_state, MnistNeighborhood, MnistNetConfig,
    MnistSubsample, TrainConfig, WeightFnKind,
};

fn main() {
    let dataset = Dataset::synthetic(600, 200, 0);
    let protocol = RobustnessProtocol::scale_preset();
    let cfg = TrainConfig { seed: 1, epochs: 3, ..TrainConfig::default() };

    let net = MnistNetConfig {
        neighborhood: MnistNeighborhood::EpsilonBall { k_cap: 16 },
        weight_fn: WeightFnKind::CubicPoly,
        subsample: MnistSubsample::Fps,
        c_mid: 16,
    };
    let spec = build_mnist_network(&net).unwrap();
    let mut state = init_state(&spec, 7).unwrap();

    let train: Vec<_> = dataset
        .train
        .iter()
        .map(|(img, lbl)| (protocol.variant_cloud(img, 28, None).unwrap(), *lbl as usize))
        .collect();
    let test: Vec<_> = dataset
        .test
        .iter()
        .map(|(img, lbl)| (protocol.variant_cloud(img, 28, None).unwrap(), *lbl as usize))
        .collect();

    let t0 = Instant::now();
    let losses = fit(&spec, &mut state, &train, &cfg, Some(&|e, l| {
        eprintln!("epoch {e}: loss {l:.4} ({:.1?})", t0.elapsed());
    }))
    .unwrap();
    let acc = evaluate(&spec, &state, &test).unwrap();
    println!("losses: {losses:?}");
    println!("test accuracy @28x28 after 3 epochs on 600 imgs: {acc:.3}");
}
