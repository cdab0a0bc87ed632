//! Checkpoints: network spec, parameters, Adam moments, and step counter in
//! the tensor container format.

use std::path::Path;

use serde_json::json;

use crate::conv::params_io::TensorFile;
use crate::error::{Error, Result};
use crate::network::spec::NetworkSpec;
use crate::network::state::ModelState;

const FORMAT: &str = "pointconv-checkpoint-v1";

/// Write a checkpoint.
pub fn save_checkpoint(path: &Path, spec: &NetworkSpec, state: &ModelState) -> Result<()> {
    let mut tf = TensorFile::new(json!({
        "format": FORMAT,
        "spec": serde_json::to_value(spec)?,
        "step": state.step,
    }));
    for (group, layers) in [
        ("param", &state.layers),
        ("adam_m", &state.adam_m),
        ("adam_v", &state.adam_v),
    ] {
        for (i, layer) in layers.iter().enumerate() {
            let shapes = layer.tensor_shapes();
            for ((name, data), shape) in layer.tensors().into_iter().zip(shapes) {
                tf.push(format!("{group}.layer{i}.{name}"), shape, data);
            }
        }
    }
    tf.write(path)
}

/// Read a checkpoint back into a spec and a fully populated state.
pub fn load_checkpoint(path: &Path) -> Result<(NetworkSpec, ModelState)> {
    let tf = TensorFile::read(path)?;
    if tf.meta["format"] != FORMAT {
        return Err(Error::Checkpoint(format!(
            "unexpected format {:?}",
            tf.meta.get("format")
        )));
    }
    let spec: NetworkSpec = serde_json::from_value(tf.meta["spec"].clone())?;
    let step = tf.meta["step"]
        .as_u64()
        .ok_or_else(|| Error::Checkpoint("missing step counter".into()))?;

    let mut state = crate::network::state::init_state(&spec, 0)?;
    state.step = step;
    for (group, layers) in [
        ("param", &mut state.layers),
        ("adam_m", &mut state.adam_m),
        ("adam_v", &mut state.adam_v),
    ] {
        for (i, layer) in layers.iter_mut().enumerate() {
            let shapes = layer.tensor_shapes();
            let names: Vec<&'static str> = layer.tensors().iter().map(|(n, _)| *n).collect();
            for ((dst, name), shape) in
                layer.tensors_mut().into_iter().zip(names).zip(shapes)
            {
                let (got_shape, data) = tf.get(&format!("{group}.layer{i}.{name}"))?;
                if got_shape != shape.as_slice() {
                    return Err(Error::Checkpoint(format!(
                        "tensor {group}.layer{i}.{name} has shape {got_shape:?}, expected {shape:?}"
                    )));
                }
                dst.copy_from_slice(data);
            }
        }
    }
    Ok((spec, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::ActivationKind;
    use crate::network::spec::{
        build_mnist_network, MnistNeighborhood, MnistNetConfig, MnistSubsample, WeightFnKind,
    };
    use crate::network::state::init_state;

    #[test]
    fn round_trip_is_exact() {
        let spec = build_mnist_network(&MnistNetConfig {
            neighborhood: MnistNeighborhood::EpsilonBall { k_cap: 16 },
            weight_fn: WeightFnKind::Mlp { activation: ActivationKind::Sine },
            subsample: MnistSubsample::Fps,
            c_mid: 8,
        })
        .unwrap();
        let mut state = init_state(&spec, 13).unwrap();
        state.step = 41;

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &spec, &state).unwrap();
        let (spec2, state2) = load_checkpoint(&path).unwrap();
        assert_eq!(spec, spec2);
        assert_eq!(state, state2);
    }
}
