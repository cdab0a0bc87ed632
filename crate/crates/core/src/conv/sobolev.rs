//! Sobolev smoothness penalty for polynomial weight functions.
//!
//! With the scaled cubic basis, an L2 penalty restricted to the degree-≥2
//! coefficient columns equals λ times the mean squared second-derivative
//! seminorm of the weight function over the symmetric unit box, up to the
//! fixed factor 12. Linear and constant terms are exempt.

use ndarray::Array2;

use crate::conv::weight_fn::WeightFnParams;
use crate::descriptors::poly::degree_mask;
use crate::error::{Error, Result};

/// Penalty value and gradient w.r.t. the coefficient matrix.
///
/// `penalty = λ · Σ θ²` over the degree-≥2 columns of Θ; the gradient is
/// `2λ·Θ` masked to those columns. Calling this on an MLP weight function is
/// an error.
pub fn sobolev_penalty(params: &WeightFnParams, lambda: f64) -> Result<(f64, Array2<f64>)> {
    let WeightFnParams::CubicPoly { dim, theta } = params else {
        return Err(Error::SobolevOnMlp);
    };
    let mask = degree_mask(*dim);
    let mut penalty = 0.0;
    let mut grad = Array2::zeros(theta.raw_dim());
    for (col, &penalized) in mask.iter().enumerate() {
        if !penalized {
            continue;
        }
        for row in 0..theta.nrows() {
            let v = theta[[row, col]];
            penalty += v * v;
            grad[[row, col]] = 2.0 * lambda * v;
        }
    }
    Ok((lambda * penalty, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::POLY_LEN_2D;

    #[test]
    fn linear_and_constant_columns_are_exempt() {
        let mut theta = Array2::zeros((4, POLY_LEN_2D));
        theta.column_mut(7).fill(3.0); // x
        theta.column_mut(8).fill(-2.0); // y
        theta.column_mut(9).fill(10.0); // 1
        let params = WeightFnParams::CubicPoly { dim: 2, theta };
        let (p, g) = sobolev_penalty(&params, 1.0).unwrap();
        assert_eq!(p, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_entry_in_x2_column() {
        let mut theta = Array2::zeros((1, POLY_LEN_2D));
        theta[[0, 4]] = 1.0 / 3.0_f64.sqrt(); // the √3x² column
        let params = WeightFnParams::CubicPoly { dim: 2, theta };
        let (p, g) = sobolev_penalty(&params, 1.0).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
        assert!((g[[0, 4]] - 2.0 / 3.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_lambda_zeroes_both() {
        let mut theta = Array2::zeros((2, POLY_LEN_2D));
        theta.fill(0.5);
        let params = WeightFnParams::CubicPoly { dim: 2, theta };
        let (p, g) = sobolev_penalty(&params, 0.0).unwrap();
        assert_eq!(p, 0.0);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mlp_is_rejected() {
        let mut rng = crate::rng::seeded_rng(0);
        let params = WeightFnParams::init_mlp(
            crate::conv::DescriptorKind::Offset,
            2,
            4,
            crate::conv::ActivationKind::ReLU,
            &mut rng,
        );
        assert!(matches!(sobolev_penalty(&params, 1.0), Err(Error::SobolevOnMlp)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::rng::seeded_rng(77);
        use rand::Rng;
        let theta = Array2::from_shape_fn((3, POLY_LEN_2D), |_| rng.gen_range(-1.0..1.0));
        let lambda = 1e-3;
        let params = WeightFnParams::CubicPoly { dim: 2, theta: theta.clone() };
        let (_, grad) = sobolev_penalty(&params, lambda).unwrap();
        let h = 1e-6;
        for row in 0..3 {
            for col in 0..POLY_LEN_2D {
                let mut plus = theta.clone();
                plus[[row, col]] += h;
                let mut minus = theta.clone();
                minus[[row, col]] -= h;
                let (pp, _) = sobolev_penalty(
                    &WeightFnParams::CubicPoly { dim: 2, theta: plus },
                    lambda,
                )
                .unwrap();
                let (pm, _) = sobolev_penalty(
                    &WeightFnParams::CubicPoly { dim: 2, theta: minus },
                    lambda,
                )
                .unwrap();
                let fd = (pp - pm) / (2.0 * h);
                let g = grad[[row, col]];
                assert!(
                    (fd - g).abs() <= 1e-8 * (1.0 + fd.abs().max(g.abs())),
                    "fd {fd} vs grad {g} at ({row},{col})"
                );
            }
        }
    }
}
