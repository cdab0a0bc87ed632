//! Surface normal estimation for synthetic 3D clouds.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{build_index, PointCloud};

/// Component below which a normal coordinate is treated as zero when
/// resolving the orientation sign.
const SIGN_TIE_TOL: f64 = 1e-9;

/// Estimate per-point unit normals from the k-nearest-neighbor covariance.
///
/// The normal at a point is the eigenvector of the smallest eigenvalue of the
/// covariance of its `k` nearest neighbors (the point itself included). The
/// sign is fixed so the normal has a positive dot product with +z, falling
/// back to +x and then +y when earlier components vanish.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if cloud.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: cloud.dim() });
    }
    if k < 3 {
        return Err(Error::MisalignedArrays(format!(
            "normal estimation needs k >= 3, got {k}"
        )));
    }
    if k > cloud.len() {
        return Err(Error::KExceedsCloud { k, n: cloud.len() });
    }

    let index = build_index(cloud)?;
    let mut normals = Vec::with_capacity(cloud.len());
    for i in 0..cloud.len() {
        let neighbors = index.knn(&cloud.position(i), k);
        let mut mean = Vector3::zeros();
        for &j in &neighbors {
            mean += cloud.position(j);
        }
        mean /= k as f64;

        let mut cov = Matrix3::zeros();
        for &j in &neighbors {
            let d = cloud.position(j) - mean;
            cov += d * d.transpose();
        }
        cov /= k as f64;
        if cov.trace() < 1e-24 {
            return Err(Error::DegenerateCovariance);
        }

        let eigen = nalgebra::SymmetricEigen::new(cov);
        let mut smallest = 0;
        for a in 1..3 {
            if eigen.eigenvalues[a] < eigen.eigenvalues[smallest] {
                smallest = a;
            }
        }
        let mut n = eigen.eigenvectors.column(smallest).into_owned();
        n.normalize_mut();
        orient(&mut n);
        normals.push(n);
    }
    cloud.clone().with_normals(normals)
}

fn orient(n: &mut Vector3<f64>) {
    for axis in [2, 0, 1] {
        if n[axis] > SIGN_TIE_TOL {
            return;
        }
        if n[axis] < -SIGN_TIE_TOL {
            *n = -*n;
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn flat_plane_gives_plus_z() {
        let mut rng = crate::rng::seeded_rng(3);
        let pts: Vec<Vector3<f64>> = (0..50)
            .map(|_| Vector3::new(rng.gen::<f64>(), rng.gen::<f64>(), 0.0))
            .collect();
        let cloud = PointCloud::from_positions_3d(pts);
        let out = estimate_normals(&cloud, 6).unwrap();
        for n in out.normals().unwrap() {
            assert!((n - Vector3::z()).norm() < 1e-9);
        }
    }

    #[test]
    fn diagonal_plane_signs_by_plus_x() {
        // Points on the plane x = y; the normal direction is (1,-1,0)/sqrt(2)
        // and the sign rule makes the x component positive.
        let mut rng = crate::rng::seeded_rng(4);
        let pts: Vec<Vector3<f64>> = (0..60)
            .map(|_| {
                let t = rng.gen::<f64>();
                let z = rng.gen::<f64>();
                Vector3::new(t, t, z)
            })
            .collect();
        let cloud = PointCloud::from_positions_3d(pts);
        let out = estimate_normals(&cloud, 8).unwrap();
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        for n in out.normals().unwrap() {
            assert!((n - Vector3::new(inv_sqrt2, -inv_sqrt2, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn sphere_normals_are_near_radial() {
        // Fibonacci sphere: 500 quasi-uniform points on the unit sphere.
        let n = 500;
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let pts: Vec<Vector3<f64>> = (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let theta = 2.0 * std::f64::consts::PI * i as f64 / golden;
                Vector3::new(r * theta.cos(), r * theta.sin(), z)
            })
            .collect();
        let cloud = PointCloud::from_positions_3d(pts.clone());
        let out = estimate_normals(&cloud, 8).unwrap();
        let max_angle_deg = 5.0_f64;
        let cos_tol = max_angle_deg.to_radians().cos();
        for (p, n) in pts.iter().zip(out.normals().unwrap()) {
            // Estimated normals are unsigned relative to the radial
            // direction, so compare the absolute cosine.
            assert!(p.dot(n).abs() >= cos_tol, "normal more than 5 degrees off radial");
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let cloud = PointCloud::from_positions_3d(vec![Vector3::new(1.0, 2.0, 3.0); 5]);
        assert!(matches!(
            estimate_normals(&cloud, 3),
            Err(Error::DegenerateCovariance)
        ));
    }
}
