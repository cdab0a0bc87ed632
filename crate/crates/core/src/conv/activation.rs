//! Elementwise activations for the MLP weight function and conv layers.

use serde::{Deserialize, Serialize};

/// SeLU constants from the self-normalizing networks paper.
const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;
const SELU_SCALE: f64 = 1.050_700_987_355_480_5;
const LEAKY_SLOPE: f64 = 0.01;

/// Supported activation functions.
///
/// `Sine` is plain `sin(x)`; it vanishes at 0 so it adds no constant offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivationKind {
    ReLU,
    SeLU,
    LeakyReLU,
    Sine,
}

impl ActivationKind {
    /// All variants, in a stable order (useful for sweep tests).
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::ReLU,
        ActivationKind::SeLU,
        ActivationKind::LeakyReLU,
        ActivationKind::Sine,
    ];

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ActivationKind::ReLU => x.max(0.0),
            ActivationKind::SeLU => {
                if x > 0.0 {
                    SELU_SCALE * x
                } else {
                    SELU_SCALE * SELU_ALPHA * (x.exp() - 1.0)
                }
            }
            ActivationKind::LeakyReLU => {
                if x > 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            ActivationKind::Sine => x.sin(),
        }
    }

    /// Derivative at `x` (subgradient 0 at the ReLU kink).
    pub fn grad(&self, x: f64) -> f64 {
        match self {
            ActivationKind::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::SeLU => {
                if x > 0.0 {
                    SELU_SCALE
                } else {
                    SELU_SCALE * SELU_ALPHA * x.exp()
                }
            }
            ActivationKind::LeakyReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            ActivationKind::Sine => x.cos(),
        }
    }
}

/// Apply an activation elementwise.
pub fn activation_apply(kind: ActivationKind, x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| kind.eval(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_values() {
        assert_eq!(ActivationKind::ReLU.eval(-1.0), 0.0);
        assert_eq!(ActivationKind::ReLU.eval(2.0), 2.0);
    }

    #[test]
    fn sine_vanishes_at_zero() {
        assert_eq!(ActivationKind::Sine.eval(0.0), 0.0);
    }

    #[test]
    fn selu_published_constants() {
        assert_eq!(ActivationKind::SeLU.eval(0.0), 0.0);
        assert_eq!(ActivationKind::SeLU.eval(1.0), 1.050_700_987_355_480_5);
    }

    #[test]
    fn leaky_relu_slope() {
        assert_eq!(ActivationKind::LeakyReLU.eval(-2.0), -0.02);
        assert_eq!(ActivationKind::LeakyReLU.eval(3.0), 3.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-7;
        for kind in ActivationKind::ALL {
            for &x in &[-1.7, -0.3, 0.4, 1.9] {
                let fd = (kind.eval(x + h) - kind.eval(x - h)) / (2.0 * h);
                assert!(
                    (kind.grad(x) - fd).abs() < 1e-6,
                    "{kind:?} grad mismatch at {x}"
                );
            }
        }
    }

    #[test]
    fn apply_is_elementwise() {
        let out = activation_apply(ActivationKind::ReLU, &[-1.0, 0.5]);
        assert_eq!(out, vec![0.0, 0.5]);
    }
}
