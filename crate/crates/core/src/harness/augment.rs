//! Scale and rotation augmentation.

use crate::descriptors::{infer_raster_dims, Image};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Bilinear rescale to a square `target x target` with corner-aligned
/// sampling (output corners map exactly onto source corners).
pub fn rescale_image(image: &Image, target: usize) -> Image {
    assert!(target >= 1, "target side must be at least 1");
    let (h, w, c) = (image.height(), image.width(), image.channels());
    let mut data = Vec::with_capacity(target * target * c);
    for i in 0..target {
        let u = source_coord(i, target, h);
        let (i0, i1, fu) = split(u, h);
        for j in 0..target {
            let v = source_coord(j, target, w);
            let (j0, j1, fv) = split(v, w);
            for ch in 0..c {
                let a = image.get(i0, j0, ch);
                let b = image.get(i0, j1, ch);
                let d = image.get(i1, j0, ch);
                let e = image.get(i1, j1, ch);
                data.push(
                    a * (1.0 - fu) * (1.0 - fv)
                        + b * (1.0 - fu) * fv
                        + d * fu * (1.0 - fv)
                        + e * fu * fv,
                );
            }
        }
    }
    Image::new(target, target, c, data)
}

fn source_coord(i: usize, target: usize, source: usize) -> f64 {
    if target == 1 {
        (source - 1) as f64 / 2.0
    } else {
        i as f64 * (source - 1) as f64 / (target - 1) as f64
    }
}

fn split(u: f64, len: usize) -> (usize, usize, f64) {
    let i0 = (u.floor() as usize).min(len - 1);
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, u - i0 as f64)
}

/// Rotate a raster-derived 2D cloud counterclockwise by `angle_deg` about
/// the centroid of its normalized grid, `(0.5·(1 + 1/m), 0.5·(1 + 1/n))`.
/// Features are unchanged.
pub fn rotate_pointcloud(cloud: &PointCloud, angle_deg: f64) -> Result<PointCloud> {
    if cloud.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: cloud.dim() });
    }
    let (m, n) = infer_raster_dims(cloud).ok_or_else(|| {
        Error::MisalignedArrays("rotation center needs a full raster-grid cloud".into())
    })?;
    let center = [0.5 * (1.0 + 1.0 / m as f64), 0.5 * (1.0 + 1.0 / n as f64)];
    rotate_pointcloud_about(cloud, angle_deg, center)
}

/// Rotate a 2D cloud counterclockwise about an explicit center.
pub fn rotate_pointcloud_about(
    cloud: &PointCloud,
    angle_deg: f64,
    center: [f64; 2],
) -> Result<PointCloud> {
    if cloud.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: cloud.dim() });
    }
    if angle_deg == 0.0 {
        return Ok(cloud.clone());
    }
    let theta = angle_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let rotated: Vec<[f64; 2]> = cloud
        .positions()
        .iter()
        .map(|p| {
            let dx = p.x - center[0];
            let dy = p.y - center[1];
            [center[0] + cos * dx - sin * dy, center[1] + sin * dx + cos * dy]
        })
        .collect();
    let mut out = PointCloud::from_positions_2d(rotated);
    if let Some(f) = cloud.features() {
        out = out.with_features(f.clone())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::raster_to_pointcloud;

    #[test]
    fn constant_image_rescales_to_constant() {
        let image = Image::new(5, 5, 1, vec![0.6; 25]);
        for target in [1, 3, 8, 17] {
            let out = rescale_image(&image, target);
            assert_eq!(out.height(), target);
            assert!(out.data().iter().all(|&v| (v - 0.6).abs() < 1e-12));
        }
    }

    #[test]
    fn same_size_rescale_is_identity() {
        let image = Image::new(4, 4, 1, (0..16).map(|v| v as f64 / 15.0).collect());
        let out = rescale_image(&image, 4);
        for (a, b) in image.data().iter().zip(out.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn checkerboard_upscale_matches_hand_bilinear() {
        // 2x2 checkerboard to 4x4: source coords are i/3 for i = 0..4.
        let image = Image::new(2, 2, 1, vec![1.0, 0.0, 0.0, 1.0]);
        let out = rescale_image(&image, 4);
        let f = |u: f64, v: f64| {
            1.0 * (1.0 - u) * (1.0 - v) + 0.0 * (1.0 - u) * v + 0.0 * u * (1.0 - v) + 1.0 * u * v
        };
        for i in 0..4 {
            for j in 0..4 {
                let expect = f(i as f64 / 3.0, j as f64 / 3.0);
                assert!(
                    (out.get(i, j, 0) - expect).abs() < 1e-12,
                    "({i},{j}): {} vs {expect}",
                    out.get(i, j, 0)
                );
            }
        }
    }

    #[test]
    fn zero_rotation_is_identity() {
        let image = Image::new(4, 4, 1, (0..16).map(|v| v as f64 / 15.0).collect());
        let cloud = raster_to_pointcloud(&image);
        let out = rotate_pointcloud(&cloud, 0.0).unwrap();
        assert_eq!(cloud, out);
    }

    #[test]
    fn quarter_turn_about_explicit_center() {
        let cloud = PointCloud::from_positions_2d([[0.25, 0.5]]);
        let out = rotate_pointcloud_about(&cloud, 90.0, [0.5, 0.5]).unwrap();
        let p = out.position(0);
        assert!((p.x - 0.5).abs() < 1e-12 && (p.y - 0.25).abs() < 1e-12);
    }

    #[test]
    fn full_turn_returns_to_start() {
        let image = Image::new(3, 3, 1, vec![0.5; 9]);
        let cloud = raster_to_pointcloud(&image);
        let out = rotate_pointcloud(&cloud, 360.0).unwrap();
        for (a, b) in cloud.positions().iter().zip(out.positions()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_centroid_is_fixed_point() {
        let image = Image::new(4, 4, 1, vec![0.1; 16]);
        let cloud = raster_to_pointcloud(&image);
        let rotated = rotate_pointcloud(&cloud, 37.0).unwrap();
        let mean = |c: &PointCloud| {
            let mut s = nalgebra::Vector3::zeros();
            for p in c.positions() {
                s += p;
            }
            s / c.len() as f64
        };
        assert!((mean(&cloud) - mean(&rotated)).norm() < 1e-12);
    }
}
