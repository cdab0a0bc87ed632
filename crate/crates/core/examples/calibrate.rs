//! Timing probe: forward/backward throughput of the MNIST preset.
use std::time::Instant;

use pointconv_core::harness::{Dataset, RobustnessProtocol};
use pointconv_core::network::{
    build_mnist_network, evaluate, init_state, train_step, MnistNeighborhood, MnistNetConfig,
    MnistSubsample, TrainConfig, WeightFnKind,
};

fn main() {
    let dataset = Dataset::synthetic(120, 60, 0);
    let protocol = RobustnessProtocol::scale_preset();
    let cfg = TrainConfig { seed: 1, ..TrainConfig::default() };

    for (name, net) in [
        (
            "eball-cubic",
            MnistNetConfig {
                neighborhood: MnistNeighborhood::EpsilonBall { k_cap: 16 },
                weight_fn: WeightFnKind::CubicPoly,
                subsample: MnistSubsample::Fps,
                c_mid: 16,
            },
        ),
        (
            "knn-relu",
            MnistNetConfig {
                neighborhood: MnistNeighborhood::Knn { k: 9 },
                weight_fn: WeightFnKind::Mlp {
                    activation: pointconv_core::conv::ActivationKind::ReLU,
                },
                subsample: MnistSubsample::Fps,
                c_mid: 16,
            },
        ),
    ] {
        let spec = build_mnist_network(&net).unwrap();
        let mut state = init_state(&spec, 7).unwrap();

        let batch: Vec<_> = (0..60)
            .map(|i| {
                let (img, lbl) = &dataset.train[i];
                (protocol.variant_cloud(img, 28, None).unwrap(), *lbl as usize)
            })
            .collect();

        let t0 = Instant::now();
        let loss = train_step(&spec, &mut state, &batch, &cfg).unwrap();
        let step_time = t0.elapsed();

        let eval_set: Vec<_> = dataset
            .test
            .iter()
            .map(|(img, lbl)| (protocol.variant_cloud(img, 72, None).unwrap(), *lbl as usize))
            .collect();
        let t1 = Instant::now();
        let acc = evaluate(&spec, &state, &eval_set).unwrap();
        let eval_time = t1.elapsed();

        println!(
            "{name}: train_step(60 imgs @28x28) = {:.2?} ({:.1} ms/img), loss {loss:.3}; eval 60 imgs @72x72 = {:.2?} ({:.1} ms/img), acc {acc:.2}",
            step_time,
            step_time.as_secs_f64() * 1000.0 / 60.0,
            eval_time,
            eval_time.as_secs_f64() * 1000.0 / 60.0,
        );
    }
}
