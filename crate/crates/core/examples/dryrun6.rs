//! Dry run of the desk-scale learning target: 2000 train / 1000 test @28x28.
use std::time::Instant;

use pointconv_core::harness::{Dataset, RobustnessProtocol};
use pointconv_core::network::{
    build_mnist_network, evaluate, fit, init_state, MnistNeighborhood, MnistNetConfig,
    MnistSubsample, TrainConfig, WeightFnKind,
};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(20);

    let dataset = Dataset::synthetic(2000, 1500, 0);
    let protocol = RobustnessProtocol::scale_preset();
    let cfg = TrainConfig { seed: 1, epochs, learning_rate: lr, ..TrainConfig::default() };

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
    let test: Vec<_> = dataset.test[500..]
        .iter()
        .map(|(img, lbl)| (protocol.variant_cloud(img, 28, None).unwrap(), *lbl as usize))
        .collect();

    let t0 = Instant::now();
    for epoch_block in 0..epochs {
        let one = TrainConfig { epochs: 1, seed: cfg.seed + epoch_block as u64, ..cfg.clone() };
        let losses = fit(&spec, &mut state, &train, &one, None).unwrap();
        let acc = evaluate(&spec, &state, &test).unwrap();
        println!(
            "epoch {epoch_block}: loss {:.4}, test acc {:.4} ({:.0?})",
            losses[0],
            acc,
            t0.elapsed()
        );
    }
}
