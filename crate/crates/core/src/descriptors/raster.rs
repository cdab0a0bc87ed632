//! Raster images and their point-cloud form.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::geometry::PointCloud;

/// A dense raster image with interleaved channels, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    /// Build from raw interleaved data; panics if the length disagrees.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), height * width * channels, "image data length");
        Self { height, width, channels, data }
    }

    /// Single-channel image from nested rows (test and fixture helper).
    pub fn from_gray_rows(rows: &[Vec<f64>]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(height, width, 1, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.data[(row * self.width + col) * self.channels + channel]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Convert a raster image to a 2D point cloud.
///
/// Each pixel `(i, j)` (1-based) becomes a point at `(i/m, j/n)` for an
/// `m x n` image, so coordinates live in `(0, 1]` and images of different
/// resolutions become clouds of different sampling densities. Channel values
/// are normalized to `[0, 1]`: inputs with a maximum above 1 are treated as
/// 8-bit and divided by 255.
pub fn raster_to_pointcloud(image: &Image) -> PointCloud {
    let m = image.height() as f64;
    let n = image.width() as f64;
    let scale = if image.data().iter().cloned().fold(0.0, f64::max) > 1.0 {
        1.0 / 255.0
    } else {
        1.0
    };

    let mut positions = Vec::with_capacity(image.height() * image.width());
    let mut features = Array2::zeros((image.height() * image.width(), image.channels()));
    for i in 0..image.height() {
        for j in 0..image.width() {
            let p = i * image.width() + j;
            positions.push([(i + 1) as f64 / m, (j + 1) as f64 / n]);
            for ch in 0..image.channels() {
                features[[p, ch]] = image.get(i, j, ch) * scale;
            }
        }
    }
    PointCloud::from_positions_2d(positions)
        .with_features(features)
        .expect("one feature row per pixel")
}

/// Recover the `(height, width)` of a full raster-grid cloud from its
/// distinct coordinate values, or `None` when the cloud is not a full grid.
pub fn infer_raster_dims(cloud: &PointCloud) -> Option<(usize, usize)> {
    let mut xs: Vec<u64> = cloud.positions().iter().map(|p| p.x.to_bits()).collect();
    let mut ys: Vec<u64> = cloud.positions().iter().map(|p| p.y.to_bits()).collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    (xs.len() * ys.len() == cloud.len()).then_some((xs.len(), ys.len()))
}
