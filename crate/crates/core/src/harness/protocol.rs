//! The scale and rotation robustness protocols.
//!
//! A protocol trains each network configuration once on the union of its
//! training variants and then sweeps the held-out variants: validation
//! accuracies are recorded for reference (nothing is tuned on them) and test
//! accuracies form the report body.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::descriptors::{raster_to_pointcloud, Image};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::harness::augment::{rescale_image, rotate_pointcloud};
use crate::harness::idx::load_idx;
use crate::harness::report::{ReportMetadata, ReportRow, RobustnessReport, Split};
use crate::harness::synthetic::synthetic_digits;
use crate::network::{
    build_mnist_network, evaluate, fit, init_state, MnistNetConfig, TrainConfig,
};
use crate::rng::derive_seed;

/// What the protocol varies between training and testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// Variants are square image side lengths in pixels.
    Scale,
    /// Variants are counterclockwise rotation angles in degrees.
    Rotation,
}

/// A robustness protocol: disjoint train/validation/test variant sets plus
/// desk-scale subset sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessProtocol {
    pub kind: ProtocolKind,
    pub train_variants: Vec<i32>,
    pub validation_variants: Vec<i32>,
    pub test_variants: Vec<i32>,
    pub train_count: usize,
    pub val_count: usize,
    pub test_count: usize,
}

impl RobustnessProtocol {
    /// Scale preset: train 20/28/36, validate 24/32, test
    /// 34/38/44/56/72/18/14/10, with 2000/500/1000 images per split.
    pub fn scale_preset() -> Self {
        Self {
            kind: ProtocolKind::Scale,
            train_variants: vec![20, 28, 36],
            validation_variants: vec![24, 32],
            test_variants: vec![34, 38, 44, 56, 72, 18, 14, 10],
            train_count: 2000,
            val_count: 500,
            test_count: 1000,
        }
    }

    /// Rotation preset: train -15/0/+15, validate -15/+15, test
    /// ±10/±20/±40 degrees, with 2000/500/1000 images per split.
    pub fn rotation_preset() -> Self {
        Self {
            kind: ProtocolKind::Rotation,
            train_variants: vec![-15, 0, 15],
            validation_variants: vec![-15, 15],
            test_variants: vec![10, -10, 20, -20, 40, -40],
            train_count: 2000,
            val_count: 500,
            test_count: 1000,
        }
    }

    /// Check variant-set disjointness between train and test.
    pub fn validate(&self) -> Result<()> {
        if self.train_variants.is_empty() || self.test_variants.is_empty() {
            return Err(Error::InvalidNetworkConfig("empty protocol variant set".into()));
        }
        for v in &self.test_variants {
            if self.train_variants.contains(v) {
                return Err(Error::InvalidNetworkConfig(format!(
                    "test variant {v} also appears in the training set"
                )));
            }
        }
        if self.kind == ProtocolKind::Scale {
            let all = self
                .train_variants
                .iter()
                .chain(&self.validation_variants)
                .chain(&self.test_variants);
            for v in all {
                if *v < 1 {
                    return Err(Error::InvalidNetworkConfig(format!("scale variant {v} < 1")));
                }
            }
        }
        Ok(())
    }

    /// Human-readable variant label used in report rows.
    pub fn variant_label(&self, v: i32) -> String {
        match self.kind {
            ProtocolKind::Scale => format!("{v}x{v}"),
            ProtocolKind::Rotation => format!("{v:+}deg"),
        }
    }

    /// Convert one image to the point cloud of a variant.
    pub fn variant_cloud(&self, image: &Image, v: i32, prune: Option<f64>) -> Result<PointCloud> {
        let cloud = match self.kind {
            ProtocolKind::Scale => raster_to_pointcloud(&rescale_image(image, v as usize)),
            ProtocolKind::Rotation => rotate_pointcloud(&raster_to_pointcloud(image), v as f64)?,
        };
        match prune {
            Some(threshold) => Ok(prune_cloud(&cloud, threshold)),
            None => Ok(cloud),
        }
    }
}

/// Drop points whose feature maximum is at or below `threshold`; if nothing
/// survives, the brightest point is kept so the cloud stays non-empty.
pub fn prune_cloud(cloud: &PointCloud, threshold: f64) -> PointCloud {
    let Some(feats) = cloud.features() else {
        return cloud.clone();
    };
    let row_max = |r: usize| feats.row(r).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let keep: Vec<usize> = (0..cloud.len()).filter(|&r| row_max(r) > threshold).collect();
    if keep.is_empty() {
        let best = (0..cloud.len())
            .max_by(|&a, &b| row_max(a).total_cmp(&row_max(b)))
            .expect("non-empty cloud");
        return cloud.select(&[best]);
    }
    cloud.select(&keep)
}

/// A raw image dataset split into train and test pools.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<(Image, u8)>,
    pub test: Vec<(Image, u8)>,
}

impl Dataset {
    /// Load the four standard MNIST IDX files from a directory.
    pub fn load_mnist_dir(dir: &Path) -> Result<Self> {
        Ok(Self {
            train: load_idx(
                &dir.join("train-images-idx3-ubyte"),
                &dir.join("train-labels-idx1-ubyte"),
            )?,
            test: load_idx(
                &dir.join("t10k-images-idx3-ubyte"),
                &dir.join("t10k-labels-idx1-ubyte"),
            )?,
        })
    }

    /// Deterministic synthetic digit corpus (MNIST stand-in).
    pub fn synthetic(n_train: usize, n_test: usize, seed: u64) -> Self {
        Self {
            train: synthetic_digits(n_train, derive_seed(seed, &[1])),
            test: synthetic_digits(n_test, derive_seed(seed, &[2])),
        }
    }
}

/// A named network configuration inside a protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedConfig {
    pub name: String,
    pub net: MnistNetConfig,
}

/// Run a protocol over a list of configs.
///
/// Every config is trained once on the union of training variants with a
/// seed derived from `(cfg.seed, config content)`, so identical configs
/// produce identical rows. Validation rows are recorded for reference; test
/// rows cover every test variant. A diverging config is recorded in the
/// metadata and skipped; the run continues.
pub fn run_protocol(
    protocol: &RobustnessProtocol,
    configs: &[NamedConfig],
    cfg: &TrainConfig,
    dataset: &Dataset,
    progress: Option<&dyn Fn(String)>,
) -> Result<RobustnessReport> {
    protocol.validate()?;
    let started = Instant::now();
    let say = |msg: String| {
        if let Some(cb) = progress {
            cb(msg);
        }
    };

    let train_pool = &dataset.train[..protocol.train_count.min(dataset.train.len())];
    let val_end = protocol.val_count.min(dataset.test.len());
    let val_pool = &dataset.test[..val_end];
    let test_end = (val_end + protocol.test_count).min(dataset.test.len());
    let test_pool = &dataset.test[val_end..test_end];

    say(format!(
        "building training clouds: {} images x {} variants",
        train_pool.len(),
        protocol.train_variants.len()
    ));
    let mut train_set = Vec::with_capacity(train_pool.len() * protocol.train_variants.len());
    for &v in &protocol.train_variants {
        for (image, label) in train_pool {
            train_set.push((
                protocol.variant_cloud(image, v, cfg.prune_threshold)?,
                *label as usize,
            ));
        }
    }

    let mut rows = Vec::new();
    let mut diverged = Vec::new();
    let mut hash_acc: u64 = 0;
    for config in configs {
        let config_json = serde_json::to_string(&config.net)?;
        let config_hash = derive_seed(0, &hash_words(config_json.as_bytes()));
        hash_acc ^= config_hash;

        let spec = build_mnist_network(&config.net)?;
        let mut state = init_state(&spec, derive_seed(cfg.seed, &[config_hash]))?;
        let run_cfg = TrainConfig { seed: derive_seed(cfg.seed, &[config_hash, 1]), ..cfg.clone() };

        say(format!("training config {} ({} epochs)", config.name, run_cfg.epochs));
        let name = config.name.clone();
        let fit_progress = |epoch: usize, loss: f64| {
            say(format!("  {name}: epoch {epoch} mean loss {loss:.4}"));
        };
        match fit(&spec, &mut state, &train_set, &run_cfg, Some(&fit_progress)) {
            Ok(_) => {}
            Err(Error::Diverged) => {
                say(format!("  {name}: diverged, skipping evaluation"));
                diverged.push(config.name.clone());
                continue;
            }
            Err(e) => return Err(e),
        }

        for (variants, pool, split) in [
            (&protocol.validation_variants, val_pool, Split::Validation),
            (&protocol.test_variants, test_pool, Split::Test),
        ] {
            for &v in variants {
                let set: Vec<(PointCloud, usize)> = pool
                    .iter()
                    .map(|(image, label)| {
                        Ok((
                            protocol.variant_cloud(image, v, cfg.prune_threshold)?,
                            *label as usize,
                        ))
                    })
                    .collect::<Result<_>>()?;
                let accuracy = evaluate(&spec, &state, &set)?;
                say(format!(
                    "  {}: {} {} accuracy {:.4}",
                    config.name,
                    split,
                    protocol.variant_label(v),
                    accuracy
                ));
                rows.push(ReportRow {
                    config: config.name.clone(),
                    variant: protocol.variant_label(v),
                    split,
                    accuracy,
                });
            }
        }
    }

    Ok(RobustnessReport {
        rows,
        metadata: ReportMetadata {
            seed: cfg.seed,
            commit: std::env::var("POINTCONV_COMMIT").unwrap_or_else(|_| "unknown".into()),
            config_hash: format!("{hash_acc:016x}"),
            wall_time_secs: started.elapsed().as_secs_f64(),
            diverged,
        },
    })
}

fn hash_words(bytes: &[u8]) -> Vec<u64> {
    bytes
        .chunks(8)
        .map(|c| {
            let mut w = [0u8; 8];
            w[..c.len()].copy_from_slice(c);
            u64::from_le_bytes(w)
        })
        .collect()
}
