//! Subsampling schemes: farthest point sampling, PC-2D raster windows, and
//! barycentric grid pooling.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Greedy max-min farthest point sampling.
///
/// `output[0] = start`; every following index maximizes its minimum distance
/// to the already-chosen set, ties broken by ascending point index. Returns
/// `m` distinct indices into the cloud.
pub fn farthest_point_sampling(cloud: &PointCloud, m: usize, start: usize) -> Result<Vec<usize>> {
    let n = cloud.len();
    if m > n {
        return Err(Error::SampleCountExceedsCloud { m, n });
    }
    if m == 0 {
        return Err(Error::SampleCountExceedsCloud { m, n });
    }
    let positions = cloud.positions();
    let mut chosen = Vec::with_capacity(m);
    let mut is_chosen = vec![false; n];
    chosen.push(start);
    is_chosen[start] = true;

    // min_dist2[i] = squared distance from point i to the chosen set.
    let mut min_dist2: Vec<f64> = positions
        .iter()
        .map(|p| (p - positions[start]).norm_squared())
        .collect();

    while chosen.len() < m {
        let mut best = usize::MAX;
        let mut best_d2 = -1.0;
        for (i, &d2) in min_dist2.iter().enumerate() {
            if !is_chosen[i] && d2 > best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        chosen.push(best);
        is_chosen[best] = true;
        for (i, d2) in min_dist2.iter_mut().enumerate() {
            let nd2 = (positions[i] - positions[best]).norm_squared();
            if nd2 < *d2 {
                *d2 = nd2;
            }
        }
    }
    Ok(chosen)
}

/// Raster-style subsampling keeping one point per 2x2 pixel window.
///
/// Expects a cloud produced from a `height x width` raster with even sides;
/// the kept point is the window's top-left (minimum-coordinate) pixel, i.e.
/// the points whose 1-based row and column are both odd. Features carry over
/// unchanged.
pub fn pc2d_subsample(cloud: &PointCloud, width: usize, height: usize) -> Result<PointCloud> {
    Ok(cloud.select(&pc2d_keep_indices(cloud, width, height)?))
}

/// Indices of the points a PC-2D subsampling step retains: the pixels whose
/// 1-based row and column are both odd.
pub fn pc2d_keep_indices(cloud: &PointCloud, width: usize, height: usize) -> Result<Vec<usize>> {
    if width % 2 != 0 || height % 2 != 0 {
        return Err(Error::OddRaster { width, height });
    }
    let m = height as f64;
    let n = width as f64;
    Ok(cloud
        .positions()
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let row = (p.x * m).round() as i64;
            let col = (p.y * n).round() as i64;
            row % 2 == 1 && col % 2 == 1
        })
        .map(|(i, _)| i)
        .collect())
}

/// Barycentric grid subsampling with feature and normal averaging.
///
/// Partitions space into axis-aligned cubes of side `grid_size` anchored at
/// the origin and emits one point per non-empty cube at the barycenter of its
/// members. Features are averaged; normals are averaged and renormalized to
/// unit length. Output cells are ordered by their first member's index, so a
/// cloud that already has one point per cell round-trips unchanged.
pub fn grid_subsample(cloud: &PointCloud, grid_size: f64) -> Result<PointCloud> {
    if cloud.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: cloud.dim() });
    }
    if !(grid_size > 0.0) {
        return Err(Error::MisalignedArrays("grid_size must be positive".into()));
    }

    let mut cells: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (i, p) in cloud.positions().iter().enumerate() {
        let key = (
            (p.x / grid_size).floor() as i64,
            (p.y / grid_size).floor() as i64,
            (p.z / grid_size).floor() as i64,
        );
        cells.entry(key).or_default().push(i);
    }

    let mut groups: Vec<Vec<usize>> = cells.into_values().collect();
    groups.sort_by_key(|members| members[0]);

    let mut positions = Vec::with_capacity(groups.len());
    let mut features = cloud
        .features()
        .map(|f| Array2::zeros((groups.len(), f.ncols())));
    let mut normals = cloud.normals().map(|_| Vec::with_capacity(groups.len()));

    for (row, members) in groups.iter().enumerate() {
        let inv = 1.0 / members.len() as f64;
        let mut center = Vector3::zeros();
        for &i in members {
            center += cloud.position(i);
        }
        positions.push(center * inv);

        if let (Some(out), Some(f)) = (features.as_mut(), cloud.features()) {
            for &i in members {
                let mut acc = out.row_mut(row);
                acc += &f.row(i);
            }
            out.row_mut(row).mapv_inplace(|v| v * inv);
        }

        if let (Some(out), Some(ns)) = (normals.as_mut(), cloud.normals()) {
            let mut avg = Vector3::zeros();
            for &i in members {
                avg += ns[i];
            }
            let len = avg.norm();
            if len < 1e-12 {
                return Err(Error::DegenerateNormalCell);
            }
            out.push(avg / len);
        }
    }

    let mut out = PointCloud::from_positions_3d(positions);
    if let Some(f) = features {
        out = out.with_features(f)?;
    }
    if let Some(ns) = normals {
        out = out.with_normals(ns)?;
    }
    Ok(out)
}
