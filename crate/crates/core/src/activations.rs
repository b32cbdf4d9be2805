//! Parameterized activation functions `g(z; α)`.
//!
//! Each family has a shape parameter `α` that can be trained alongside the
//! weights. Setting `α = 1` recovers the usual fixed-shape function:
//!
//! | family   | `g(z; α)`                          | `α = 1`           |
//! |----------|------------------------------------|-------------------|
//! | ELU      | `z` for `z ≥ 0`, `α(eᶻ − 1)` else  | standard ELU      |
//! | Softplus | `ln(eᶻ + α²)`                      | `ln(1 + eᶻ)`      |
//! | Swish    | `z · σ(αz)`                        | SiLU              |
//!
//! Every function here comes with its exact partial derivatives in both `z`
//! and `α`, which is what backpropagation needs to train `α`.
//!
//! ```
//! use adaptact::activations::{swish, swish_grad};
//!
//! // α = 0 turns Swish into the line z/2 with slope exactly one half.
//! assert_eq!(swish(3.0, 0.0), 1.5);
//! assert_eq!(swish_grad(7.0, 0.0).0, 0.5);
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Activation family used by the hidden layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Elu,
    Softplus,
    Swish,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 3] = [
        ActivationKind::Elu,
        ActivationKind::Softplus,
        ActivationKind::Swish,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Elu => "elu",
            ActivationKind::Softplus => "softplus",
            ActivationKind::Swish => "swish",
        }
    }

    #[inline]
    pub fn value(self, z: f64, alpha: f64) -> f64 {
        match self {
            ActivationKind::Elu => elu(z, alpha),
            ActivationKind::Softplus => softplus(z, alpha),
            ActivationKind::Swish => swish(z, alpha),
        }
    }

    /// Value and both partials in one pass.
    #[inline]
    pub fn eval(self, z: f64, alpha: f64) -> ActivationEval {
        match self {
            ActivationKind::Elu => {
                let (d_dz, d_dalpha) = elu_grad(z, alpha);
                ActivationEval {
                    value: elu(z, alpha),
                    d_dz,
                    d_dalpha,
                }
            }
            ActivationKind::Softplus => {
                let value = softplus(z, alpha);
                let (d_dz, d_dalpha) = softplus_partials(z, alpha, value);
                ActivationEval {
                    value,
                    d_dz,
                    d_dalpha,
                }
            }
            ActivationKind::Swish => {
                let (d_dz, d_dalpha) = swish_grad(z, alpha);
                ActivationEval {
                    value: swish(z, alpha),
                    d_dz,
                    d_dalpha,
                }
            }
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "elu" => Ok(ActivationKind::Elu),
            "softplus" => Ok(ActivationKind::Softplus),
            "swish" => Ok(ActivationKind::Swish),
            other => Err(Error::InvalidArgument(format!(
                "unknown activation `{other}` (expected elu, softplus or swish)"
            ))),
        }
    }
}

/// `g(z; α)` together with `∂g/∂z` and `∂g/∂α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationEval {
    pub value: f64,
    pub d_dz: f64,
    pub d_dalpha: f64,
}

/// Logistic function, evaluated on the side that cannot overflow.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(eᵃ + eᵇ)` without overflow. Either argument may be `-∞`.
#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (-(a - b).abs()).exp().ln_1p()
}

#[inline]
pub fn elu(z: f64, alpha: f64) -> f64 {
    if z >= 0.0 {
        z
    } else {
        alpha * z.exp_m1()
    }
}

/// `(∂/∂z, ∂/∂α)` of [`elu`]. The kink at `z = 0` takes the right-hand branch.
#[inline]
pub fn elu_grad(z: f64, alpha: f64) -> (f64, f64) {
    if z >= 0.0 {
        (1.0, 0.0)
    } else {
        (alpha * z.exp(), z.exp_m1())
    }
}

/// `ln(eᶻ + α²)`, evaluated as a log-sum-exp of `z` and `ln α²`.
///
/// For `α = 0` this returns `z` exactly, however negative `z` is.
#[inline]
pub fn softplus(z: f64, alpha: f64) -> f64 {
    // 2 ln|α| rather than ln(α²): α² overflows long before ln|α| does.
    log_add_exp(z, 2.0 * alpha.abs().ln())
}

/// `(∂/∂z, ∂/∂α)` of [`softplus`]: `eᶻ / (eᶻ + α²)` and `2α / (eᶻ + α²)`.
#[inline]
pub fn softplus_grad(z: f64, alpha: f64) -> (f64, f64) {
    softplus_partials(z, alpha, softplus(z, alpha))
}

#[inline]
fn softplus_partials(z: f64, alpha: f64, value: f64) -> (f64, f64) {
    // Both denominators equal e^value, so dividing is multiplying by e^-value.
    let d_dz = (z - value).exp();
    // 2α·e^-value in log space: e^-value alone overflows for very negative z.
    let d_dalpha = if alpha == 0.0 {
        0.0
    } else {
        2.0 * alpha.signum() * (alpha.abs().ln() - value).exp()
    };
    (d_dz, d_dalpha)
}

/// `z · σ(αz)`.
#[inline]
pub fn swish(z: f64, alpha: f64) -> f64 {
    z * sigmoid(alpha * z)
}

/// `(∂/∂z, ∂/∂α)` of [`swish`].
///
/// `∂/∂z = (1 + αz)σ(αz) − αz σ(αz)²` and `∂/∂α = z² σ(αz)(1 − σ(αz))`.
#[inline]
pub fn swish_grad(z: f64, alpha: f64) -> (f64, f64) {
    let t = alpha * z;
    let s = sigmoid(t);
    let d_dz = (1.0 + t) * s - t * s * s;
    let d_dalpha = z * z * s * sigmoid(-t);
    (d_dz, d_dalpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // Independent finite-difference oracle for the partials.
    fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn elu_examples() {
        assert_eq!(elu(0.0, 1.5), 0.0);
        assert_eq!(elu(2.0, -3.0), 2.0);
        assert!(close(elu(-1.0, 1.0), -0.632_120_558_828_557_7, 1e-15));
    }

    #[test]
    fn elu_grad_examples() {
        assert_eq!(elu_grad(3.0, 5.0), (1.0, 0.0));
        assert_eq!(elu_grad(0.0, 7.0), (1.0, 0.0));

        let (dz, da) = elu_grad(-1.0, 2.0);
        let fd_z = central_diff(|z| elu(z, 2.0), -1.0, 1e-6);
        let fd_a = central_diff(|a| elu(-1.0, a), 2.0, 1e-6);
        assert!(close(dz, fd_z, 1e-6) && close(dz, 0.735_758_9, 1e-7));
        assert!(close(da, fd_a, 1e-6) && close(da, -0.632_120_6, 1e-7));
    }

    #[test]
    fn elu_derivative_jumps_unless_alpha_is_one() {
        let eps = 1e-12;
        for alpha in [-2.0, 0.0, 0.5, 1.0, 3.0] {
            assert!(close(elu_grad(-eps, alpha).0, alpha, 1e-9));
            assert_eq!(elu_grad(eps, alpha).0, 1.0);
            assert!(close(elu(-eps, alpha), elu(eps, alpha), 1e-11));
        }
    }

    #[test]
    fn softplus_examples() {
        assert!(close(softplus(0.0, 1.0), std::f64::consts::LN_2, 1e-15));
        assert_eq!(softplus(5.0, 0.0), 5.0);
        assert!(close(softplus(1.0, 1.0), 1.313_261_687_518_222_8, 1e-15));
    }

    #[test]
    fn softplus_alpha_zero_never_underflows_to_neg_inf() {
        assert_eq!(softplus(-800.0, 0.0), -800.0);
        assert_eq!(softplus(-1e300, 0.0), -1e300);
        let (dz, da) = softplus_grad(-800.0, 0.0);
        assert_eq!((dz, da), (1.0, 0.0));
    }

    #[test]
    fn softplus_grad_examples() {
        let (dz, da) = softplus_grad(0.0, 1.0);
        assert!(close(
            dz,
            central_diff(|z| softplus(z, 1.0), 0.0, 1e-6),
            1e-8
        ));
        assert!(close(
            da,
            central_diff(|a| softplus(0.0, a), 1.0, 1e-6),
            1e-8
        ));
        assert!(close(dz, 0.5, 1e-15) && close(da, 1.0, 1e-15));

        assert_eq!(softplus_grad(0.0, 0.0), (1.0, 0.0));

        let (dz, da) = softplus_grad(100.0, 1.0);
        assert!(close(dz, 1.0, 1e-12) && close(da, 0.0, 1e-12));
    }

    #[test]
    fn softplus_survives_extreme_inputs() {
        assert_eq!(softplus(1000.0, 1.0), 1000.0);
        let big = softplus(0.0, 1e200);
        assert!(big.is_finite() && close(big, 2.0 * 1e200f64.ln(), 1e-9));
        let (dz, da) = softplus_grad(0.0, 1e200);
        assert!(dz.is_finite() && da.is_finite());
    }

    #[test]
    fn swish_examples() {
        assert_eq!(swish(3.0, 0.0), 1.5);
        assert_eq!(swish(0.0, 9.0), 0.0);
        assert!(close(swish(1.0, 1.0), 0.731_058_578_630_004_9, 1e-15));
    }

    #[test]
    fn swish_grad_examples() {
        assert_eq!(swish_grad(7.0, 0.0).0, 0.5);
        assert_eq!(swish_grad(0.0, 3.0), (0.5, 0.0));

        let (dz, da) = swish_grad(1.0, 1.0);
        assert!(close(dz, central_diff(|z| swish(z, 1.0), 1.0, 1e-6), 1e-8));
        assert!(close(da, central_diff(|a| swish(1.0, a), 1.0, 1e-6), 1e-8));
        assert!(close(dz, 0.927_670_6, 1e-7) && close(da, 0.196_611_9, 1e-7));
    }

    #[test]
    fn swish_approaches_relu_for_large_alpha() {
        let mut z: f64 = -5.0;
        while z <= 5.0 {
            if z.abs() >= 0.5 {
                assert!((swish(z, 50.0) - z.max(0.0)).abs() < 1e-6, "z = {z}");
            }
            z += 0.01;
        }
    }

    #[test]
    fn eval_matches_individual_functions() {
        for kind in ActivationKind::ALL {
            for &(z, a) in &[(-2.0, 0.3), (0.0, 1.0), (1.7, -0.8)] {
                let e = kind.eval(z, a);
                assert_eq!(e.value, kind.value(z, a));
                let (dz, da) = match kind {
                    ActivationKind::Elu => elu_grad(z, a),
                    ActivationKind::Softplus => softplus_grad(z, a),
                    ActivationKind::Swish => swish_grad(z, a),
                };
                assert_eq!((e.d_dz, e.d_dalpha), (dz, da));
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for kind in ActivationKind::ALL {
            assert_eq!(kind.name().parse::<ActivationKind>().unwrap(), kind);
        }
        assert!("tanh".parse::<ActivationKind>().is_err());
    }
}
