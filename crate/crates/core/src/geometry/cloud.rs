//! The point-cloud container.

use nalgebra::Vector3;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum deviation from unit length tolerated for stored normals.
const UNIT_NORMAL_TOL: f64 = 1e-9;

/// An immutable 2D or 3D point cloud.
///
/// Positions are stored as 3-vectors; 2D clouds keep the third component at
/// zero so distance math is uniform across dimensions. Features are one row
/// per point; normals are unit 3-vectors and only meaningful for `dim == 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    positions: Vec<Vector3<f64>>,
    features: Option<Array2<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    /// Build a 2D cloud from `(x, y)` positions.
    pub fn from_positions_2d(points: impl IntoIterator<Item = [f64; 2]>) -> Self {
        Self {
            dim: 2,
            positions: points
                .into_iter()
                .map(|[x, y]| Vector3::new(x, y, 0.0))
                .collect(),
            features: None,
            normals: None,
        }
    }

    /// Build a 3D cloud from positions.
    pub fn from_positions_3d(points: impl IntoIterator<Item = Vector3<f64>>) -> Self {
        Self {
            dim: 3,
            positions: points.into_iter().collect(),
            features: None,
            normals: None,
        }
    }

    /// Attach per-point features (one row per point).
    pub fn with_features(mut self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.positions.len() {
            return Err(Error::MisalignedArrays(format!(
                "{} feature rows for {} points",
                features.nrows(),
                self.positions.len()
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    /// Attach unit normals (3D clouds only).
    pub fn with_normals(mut self, normals: Vec<Vector3<f64>>) -> Result<Self> {
        if self.dim != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: self.dim });
        }
        if normals.len() != self.positions.len() {
            return Err(Error::MisalignedArrays(format!(
                "{} normals for {} points",
                normals.len(),
                self.positions.len()
            )));
        }
        for n in &normals {
            if (n.norm() - 1.0).abs() > UNIT_NORMAL_TOL {
                return Err(Error::MisalignedArrays(format!(
                    "normal has length {} (expected 1)",
                    n.norm()
                )));
            }
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Vector3<f64> {
        self.positions[i]
    }

    pub fn features(&self) -> Option<&Array2<f64>> {
        self.features.as_ref()
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    /// New cloud keeping only the points at `indices`, in that order.
    ///
    /// Features and normals follow the selection.
    pub fn select(&self, indices: &[usize]) -> Self {
        let positions = indices.iter().map(|&i| self.positions[i]).collect();
        let features = self.features.as_ref().map(|f| {
            let mut out = Array2::zeros((indices.len(), f.ncols()));
            for (row, &i) in indices.iter().enumerate() {
                out.row_mut(row).assign(&f.row(i));
            }
            out
        });
        let normals = self
            .normals
            .as_ref()
            .map(|ns| indices.iter().map(|&i| ns[i]).collect());
        Self { dim: self.dim, positions, features, normals }
    }

    /// Apply a rigid transform `p -> rot * p + shift` to every position.
    ///
    /// Normals, when present, are rotated without the shift.
    pub fn transformed(&self, rot: &nalgebra::Rotation3<f64>, shift: Vector3<f64>) -> Self {
        Self {
            dim: self.dim,
            positions: self.positions.iter().map(|p| rot * p + shift).collect(),
            features: self.features.clone(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| rot * n).collect()),
        }
    }
}
