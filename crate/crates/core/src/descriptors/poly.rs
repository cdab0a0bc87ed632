//! Cubic polynomial feature bases.
//!
//! The term coefficients (√3, √6) are chosen so that a plain L2 penalty on
//! the degree-≥2 coefficients of a function expressed in this basis equals
//! the mean of its squared second derivatives over the symmetric unit box,
//! i.e. the thin-plate Sobolev seminorm up to a fixed constant.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Number of 2D basis terms.
pub const POLY_LEN_2D: usize = 10;
/// Number of 3D basis terms.
pub const POLY_LEN_3D: usize = 20;

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT6: f64 = 2.449_489_742_783_178;

/// Cubic polynomial features of a coordinate offset.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFeatures {
    pub dim: usize,
    /// Term values, 10 entries in 2D and 20 in 3D; the last entry is 1.
    pub values: Vec<f64>,
    /// `true` for every term of degree ≥ 2 (the penalized ones).
    pub degree_mask: Vec<bool>,
}

/// Evaluate the cubic polynomial basis at an offset.
///
/// 2D term order: `x³, y³, √3x²y, √3xy², √3x², √3y², √6xy, x, y, 1`.
/// 3D term order: `x³, y³, z³, √3x²y, √3x²z, √3xy², √3y²z, √3xz², √3yz²,
/// √3x², √3y², √3z², √6xyz, √6xy, √6xz, √6yz, √3x, √3y, √3z, 1`.
pub fn poly_features(offset: &Vector3<f64>, dim: usize) -> Result<PolyFeatures> {
    let (x, y, z) = (offset.x, offset.y, offset.z);
    match dim {
        2 => Ok(PolyFeatures {
            dim,
            values: vec![
                x * x * x,
                y * y * y,
                SQRT3 * x * x * y,
                SQRT3 * x * y * y,
                SQRT3 * x * x,
                SQRT3 * y * y,
                SQRT6 * x * y,
                x,
                y,
                1.0,
            ],
            degree_mask: degree_mask(2).to_vec(),
        }),
        3 => Ok(PolyFeatures {
            dim,
            values: vec![
                x * x * x,
                y * y * y,
                z * z * z,
                SQRT3 * x * x * y,
                SQRT3 * x * x * z,
                SQRT3 * x * y * y,
                SQRT3 * y * y * z,
                SQRT3 * x * z * z,
                SQRT3 * y * z * z,
                SQRT3 * x * x,
                SQRT3 * y * y,
                SQRT3 * z * z,
                SQRT6 * x * y * z,
                SQRT6 * x * y,
                SQRT6 * x * z,
                SQRT6 * y * z,
                SQRT3 * x,
                SQRT3 * y,
                SQRT3 * z,
                1.0,
            ],
            degree_mask: degree_mask(3).to_vec(),
        }),
        d => Err(Error::DimensionMismatch { expected: 2, got: d }),
    }
}

/// The degree-≥2 mask for a basis dimension: 7 of 10 terms in 2D, 16 of 20
/// in 3D (everything but the linear and constant terms).
pub fn degree_mask(dim: usize) -> &'static [bool] {
    const MASK_2D: [bool; POLY_LEN_2D] =
        [true, true, true, true, true, true, true, false, false, false];
    const MASK_3D: [bool; POLY_LEN_3D] = [
        true, true, true, true, true, true, true, true, true, true, true, true, true, true, true,
        true, false, false, false, false,
    ];
    match dim {
        2 => &MASK_2D,
        _ => &MASK_3D,
    }
}

/// Basis length for a dimension.
pub fn basis_len(dim: usize) -> usize {
    match dim {
        2 => POLY_LEN_2D,
        _ => POLY_LEN_3D,
    }
}

/// Fill `out` with the basis values at `offset` without allocating.
pub(crate) fn poly_features_into(offset: &Vector3<f64>, dim: usize, out: &mut [f64]) {
    let (x, y, z) = (offset.x, offset.y, offset.z);
    if dim == 2 {
        out[0] = x * x * x;
        out[1] = y * y * y;
        out[2] = SQRT3 * x * x * y;
        out[3] = SQRT3 * x * y * y;
        out[4] = SQRT3 * x * x;
        out[5] = SQRT3 * y * y;
        out[6] = SQRT6 * x * y;
        out[7] = x;
        out[8] = y;
        out[9] = 1.0;
    } else {
        out[0] = x * x * x;
        out[1] = y * y * y;
        out[2] = z * z * z;
        out[3] = SQRT3 * x * x * y;
        out[4] = SQRT3 * x * x * z;
        out[5] = SQRT3 * x * y * y;
        out[6] = SQRT3 * y * y * z;
        out[7] = SQRT3 * x * z * z;
        out[8] = SQRT3 * y * z * z;
        out[9] = SQRT3 * x * x;
        out[10] = SQRT3 * y * y;
        out[11] = SQRT3 * z * z;
        out[12] = SQRT6 * x * y * z;
        out[13] = SQRT6 * x * y;
        out[14] = SQRT6 * x * z;
        out[15] = SQRT6 * y * z;
        out[16] = SQRT3 * x;
        out[17] = SQRT3 * y;
        out[18] = SQRT3 * z;
        out[19] = 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_offset_is_all_zeros_but_constant() {
        let f = poly_features(&Vector3::zeros(), 2).unwrap();
        assert_eq!(f.values, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let f3 = poly_features(&Vector3::zeros(), 3).unwrap();
        assert_eq!(f3.values.len(), POLY_LEN_3D);
        assert_eq!(f3.values[POLY_LEN_3D - 1], 1.0);
        assert!(f3.values[..POLY_LEN_3D - 1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_x_2d() {
        let f = poly_features(&Vector3::new(1.0, 0.0, 0.0), 2).unwrap();
        assert_eq!(f.values, vec![1.0, 0.0, 0.0, 0.0, SQRT3, 0.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn ones_2d() {
        let f = poly_features(&Vector3::new(1.0, 1.0, 0.0), 2).unwrap();
        assert_eq!(
            f.values,
            vec![1.0, 1.0, SQRT3, SQRT3, SQRT3, SQRT3, SQRT6, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn mask_counts_match_basis() {
        let f2 = poly_features(&Vector3::new(0.2, -0.4, 0.0), 2).unwrap();
        assert_eq!(f2.degree_mask.iter().filter(|&&m| m).count(), 7);
        let f3 = poly_features(&Vector3::new(0.2, -0.4, 0.1), 3).unwrap();
        assert_eq!(f3.degree_mask.iter().filter(|&&m| m).count(), 16);
    }

    #[test]
    fn into_matches_alloc_path() {
        let off = Vector3::new(0.3, -0.7, 0.2);
        for dim in [2, 3] {
            let f = poly_features(&off, dim).unwrap();
            let mut buf = vec![0.0; basis_len(dim)];
            poly_features_into(&off, dim, &mut buf);
            assert_eq!(f.values, buf);
        }
    }

    #[test]
    fn rejects_other_dims() {
        assert!(poly_features(&Vector3::zeros(), 4).is_err());
    }
}
