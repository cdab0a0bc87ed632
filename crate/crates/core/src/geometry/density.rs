//! Inverse-density normalizers for neighborhood sums.
//!
//! kNN neighborhoods compensate non-uniform sampling with the reciprocal of a
//! Gaussian kernel density estimate, rescaled to mean 1 over the
//! neighborhood. ε-ball neighborhoods use the uniform `1/|C|` instead, which
//! is baked in at query time.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{Neighborhood, NeighborhoodKind, PointCloud};

/// Inverse-density values for a neighborhood of the given cloud.
///
/// For kNN neighborhoods this recomputes the KDE-based values from scratch;
/// for ε-ball neighborhoods the stored uniform normalizer is returned
/// unchanged.
pub fn inverse_density(cloud: &PointCloud, nbhd: &Neighborhood) -> Result<Vec<f64>> {
    match nbhd.kind {
        NeighborhoodKind::EpsilonBall => Ok(nbhd.normalizer.clone()),
        NeighborhoodKind::Knn => {
            let center = cloud.position(nbhd.center);
            let offsets: Vec<Vector3<f64>> = nbhd
                .neighbors
                .iter()
                .map(|&j| cloud.position(j) - center)
                .collect();
            knn_normalizer(&offsets)
        }
    }
}

/// KDE-based inverse density over a neighborhood given by offsets.
///
/// Each neighbor's density is a Gaussian kernel sum over the neighborhood's
/// points with bandwidth equal to the mean pairwise distance. The reciprocals
/// are rescaled so they average to exactly 1; on point sets where every
/// member is equivalent by symmetry this forces all values to 1.
pub fn knn_normalizer(offsets: &[Vector3<f64>]) -> Result<Vec<f64>> {
    let n = offsets.len();
    if n == 0 {
        return Err(Error::MisalignedArrays("empty neighborhood".into()));
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }

    let mut dist2 = vec![0.0; n * n];
    let mut bandwidth = 0.0;
    for j in 0..n {
        for l in (j + 1)..n {
            let d2 = (offsets[j] - offsets[l]).norm_squared();
            dist2[j * n + l] = d2;
            dist2[l * n + j] = d2;
            bandwidth += d2.sqrt();
        }
    }
    bandwidth /= (n * (n - 1) / 2) as f64;
    if bandwidth == 0.0 {
        return Err(Error::ZeroBandwidth);
    }

    let inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    let mut recip = vec![0.0; n];
    let mut recip_sum = 0.0;
    for j in 0..n {
        let mut kde = 0.0;
        for l in 0..n {
            kde += (-dist2[j * n + l] * inv_two_h2).exp();
        }
        recip[j] = 1.0 / kde;
        recip_sum += recip[j];
    }

    let scale = n as f64 / recip_sum;
    Ok(recip.into_iter().map(|r| r * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_index, epsilon_ball_query, knn_query};

    #[test]
    fn symmetric_grid_block_gives_all_ones() {
        // 2x2 grid: all four points are equivalent by symmetry, so the
        // normalization forces S = 1 everywhere.
        let cloud = PointCloud::from_positions_2d([
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [1.0, 1.0],
        ]);
        let index = build_index(&cloud).unwrap();
        let nbhd = knn_query(&index, 0, 4).unwrap();
        for s in &nbhd.normalizer {
            assert!((s - 1.0).abs() < 1e-9, "expected 1, got {s}");
        }
        let recomputed = inverse_density(&cloud, &nbhd).unwrap();
        assert_eq!(recomputed, nbhd.normalizer);
    }

    #[test]
    fn isolated_neighbor_gets_largest_value() {
        // A tight cluster plus one stray point: KDE is lowest at the stray
        // point, so its inverse density is strictly largest.
        let cloud = PointCloud::from_positions_2d([
            [0.0, 0.0],
            [0.1, 0.0],
            [0.0, 0.1],
            [0.1, 0.1],
            [2.0, 0.0],
        ]);
        let index = build_index(&cloud).unwrap();
        let nbhd = knn_query(&index, 0, 5).unwrap();
        let stray_pos = nbhd.neighbors.iter().position(|&j| j == 4).unwrap();
        for (j, s) in nbhd.normalizer.iter().enumerate() {
            if j != stray_pos {
                assert!(nbhd.normalizer[stray_pos] > *s);
            }
        }
    }

    #[test]
    fn epsilon_ball_mode_returns_uniform_unchanged() {
        let cloud = PointCloud::from_positions_2d([
            [0.0, 0.0],
            [0.1, 0.0],
            [0.2, 0.0],
            [0.3, 0.0],
            [0.4, 0.0],
        ]);
        let index = build_index(&cloud).unwrap();
        let nbhd = epsilon_ball_query(&index, 2, 1.0, 16, 0).unwrap();
        assert_eq!(nbhd.len(), 5);
        let values = inverse_density(&cloud, &nbhd).unwrap();
        assert_eq!(values, vec![0.2; 5]);
    }

    #[test]
    fn coincident_neighbors_error() {
        let offsets = vec![Vector3::zeros(), Vector3::zeros(), Vector3::zeros()];
        assert!(matches!(knn_normalizer(&offsets), Err(Error::ZeroBandwidth)));
    }

    #[test]
    fn normalized_mean_is_one() {
        let offsets = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(0.3, 0.1, 0.0),
            Vector3::new(-0.2, 0.4, 0.0),
            Vector3::new(0.9, -0.5, 0.0),
        ];
        let s = knn_normalizer(&offsets).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 1.0).abs() < 1e-12);
    }
}
