//! Bowl-shaped scale-invariant loss functions `L(t)` with `L(1) = 0`,
//! `L'(1) = 0` and strict convexity, evaluated at `t = estimate / target`.
//!
//! Four kinds are built in (the CLI selector string in parentheses):
//!
//! * quadratic (`squared`): `(t − 1)²`
//! * entropy (`entropy`): `t − ln t − 1`
//! * symmetric (`symmetric`): `t + 1/t − 2`
//! * linex (`linex:<alpha>`): `exp(α(t−1)) − α(t−1) − 1`, `α ≠ 0`
//!
//! The loss family is an open extension point: every solver in
//! [`crate::kernel`] works through the [`BowlLoss`] trait, so any
//! eval/derivative pair satisfying the axioms above can be plugged in.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Loss kind without parameters, used for dispatch and cache keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Quadratic,
    Entropy,
    Symmetric,
    Linex,
}

/// A concrete loss choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossSpec<T> {
    Quadratic,
    Entropy,
    Symmetric,
    Linex { alpha: T },
}

/// Eval/derivative pair of a bowl-shaped scale-invariant loss.
///
/// Implementations may assume `t > 0`; the checked entry points are
/// [`loss_eval`] and [`loss_deriv`].
pub trait BowlLoss<T: Real> {
    fn eval_unchecked(&self, t: T) -> T;
    fn deriv_unchecked(&self, t: T) -> T;
}

impl<T: Real> BowlLoss<T> for LossSpec<T> {
    #[inline]
    fn eval_unchecked(&self, t: T) -> T {
        let one = T::one();
        match *self {
            LossSpec::Quadratic => (t - one) * (t - one),
            LossSpec::Entropy => t - t.ln() - one,
            LossSpec::Symmetric => t + one / t - one - one,
            LossSpec::Linex { alpha } => {
                let z = alpha * (t - one);
                z.exp() - z - one
            }
        }
    }

    #[inline]
    fn deriv_unchecked(&self, t: T) -> T {
        let one = T::one();
        match *self {
            LossSpec::Quadratic => (t - one) + (t - one),
            LossSpec::Entropy => one - one / t,
            LossSpec::Symmetric => one - one / (t * t),
            LossSpec::Linex { alpha } => alpha * ((alpha * (t - one)).exp() - one),
        }
    }
}

impl<T: Real> LossSpec<T> {
    /// Linex loss with shape `alpha` (finite, nonzero).
    pub fn linex(alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha == T::zero() {
            return Err(Error::Validation(format!(
                "linex alpha must be finite and nonzero, got {alpha}"
            )));
        }
        Ok(LossSpec::Linex { alpha })
    }

    pub fn kind(&self) -> LossKind {
        match self {
            LossSpec::Quadratic => LossKind::Quadratic,
            LossSpec::Entropy => LossKind::Entropy,
            LossSpec::Symmetric => LossKind::Symmetric,
            LossSpec::Linex { .. } => LossKind::Linex,
        }
    }
}

/// `L(t)` with the `t > 0` domain check.
pub fn loss_eval<T: Real>(spec: &LossSpec<T>, t: T) -> Result<T> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Domain(format!("loss requires t > 0, got {t}")));
    }
    Ok(spec.eval_unchecked(t))
}

/// `L'(t)` with the `t > 0` domain check.
pub fn loss_deriv<T: Real>(spec: &LossSpec<T>, t: T) -> Result<T> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Domain(format!("loss requires t > 0, got {t}")));
    }
    Ok(spec.deriv_unchecked(t))
}

/// Why a loss/shape combination has no finite multiplier equation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DomainIssue {
    #[error("gamma shape must be positive, got a={shape}")]
    NonPositiveShape { shape: f64 },
    #[error("power k must be positive, got k={k}")]
    NonPositivePower { k: f64 },
    #[error("a−k≤0 (a={shape}, k={k}): entropy-loss multiplier integral diverges")]
    EntropyShape { shape: f64, k: f64 },
    #[error("a−2k≤0 (a={shape}, k={k}): symmetric-loss multiplier integral diverges")]
    SymmetricShape { shape: f64, k: f64 },
    #[error("linex alpha must be nonzero")]
    LinexZeroAlpha,
    #[error("divergent linex integrand (alpha={alpha} > 0 with k={k} > 1)")]
    LinexDivergent { alpha: f64, k: f64 },
}

/// Check that `E[L'(c·Yᵏ)] = 0`, `Y ~ Gamma(a, 1)`, has a finite convergent
/// integrand for some `c > 0`.
///
/// Quadratic is always fine; entropy needs `a − k > 0`; symmetric needs
/// `a − 2k > 0`; linex needs `α < 0`, or `k < 1`, or `k = 1` (where the
/// solution lies below `1/α` and the solver caps its bracket there).
pub fn validate_loss_domain<T: Real>(
    spec: &LossSpec<T>,
    gamma_shape: T,
    k: T,
) -> std::result::Result<(), DomainIssue> {
    let a = gamma_shape.to_f64().unwrap_or(f64::NAN);
    let kf = k.to_f64().unwrap_or(f64::NAN);
    if !(a > 0.0) || !a.is_finite() {
        return Err(DomainIssue::NonPositiveShape { shape: a });
    }
    if !(kf > 0.0) || !kf.is_finite() {
        return Err(DomainIssue::NonPositivePower { k: kf });
    }
    match spec {
        LossSpec::Quadratic => Ok(()),
        LossSpec::Entropy => {
            if a - kf > 0.0 {
                Ok(())
            } else {
                Err(DomainIssue::EntropyShape { shape: a, k: kf })
            }
        }
        LossSpec::Symmetric => {
            if a - 2.0 * kf > 0.0 {
                Ok(())
            } else {
                Err(DomainIssue::SymmetricShape { shape: a, k: kf })
            }
        }
        LossSpec::Linex { alpha } => {
            let alpha = alpha.to_f64().unwrap_or(f64::NAN);
            if alpha == 0.0 || !alpha.is_finite() {
                Err(DomainIssue::LinexZeroAlpha)
            } else if alpha < 0.0 || kf <= 1.0 {
                Ok(())
            } else {
                Err(DomainIssue::LinexDivergent { alpha, k: kf })
            }
        }
    }
}

impl<T: Real> fmt::Display for LossSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossSpec::Quadratic => write!(f, "squared"),
            LossSpec::Entropy => write!(f, "entropy"),
            LossSpec::Symmetric => write!(f, "symmetric"),
            LossSpec::Linex { alpha } => write!(f, "linex:{alpha}"),
        }
    }
}

impl<T: Real> FromStr for LossSpec<T> {
    type Err = Error;

    /// Parses the CLI selector: `squared|entropy|symmetric|linex:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "squared" => Ok(LossSpec::Quadratic),
            "entropy" => Ok(LossSpec::Entropy),
            "symmetric" => Ok(LossSpec::Symmetric),
            other => {
                if let Some(alpha) = other.strip_prefix("linex:") {
                    let alpha: f64 = alpha.parse().map_err(|_| {
                        Error::Validation(format!("invalid linex alpha: {alpha:?}"))
                    })?;
                    LossSpec::linex(T::from(alpha).ok_or_else(|| {
                        Error::Validation(format!("linex alpha {alpha} not representable"))
                    })?)
                } else {
                    Err(Error::Validation(format!(
                        "unknown loss {other:?} (expected squared|entropy|symmetric|linex:<alpha>)"
                    )))
                }
            }
        }
    }
}

impl<T: Real> Serialize for LossSpec<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, T: Real> Deserialize<'de> for LossSpec<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn all_kinds() -> Vec<LossSpec<f64>> {
        vec![
            LossSpec::Quadratic,
            LossSpec::Entropy,
            LossSpec::Symmetric,
            LossSpec::linex(0.75).unwrap(),
            LossSpec::linex(-1.0).unwrap(),
        ]
    }

    #[test]
    fn eval_known_values() {
        assert_eq!(loss_eval(&LossSpec::Quadratic, 1.0f64).unwrap(), 0.0);
        assert_eq!(loss_eval(&LossSpec::Quadratic, 2.0f64).unwrap(), 1.0);
        assert_relative_eq!(
            loss_eval(&LossSpec::Entropy, std::f64::consts::E).unwrap(),
            std::f64::consts::E - 2.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            loss_eval(&LossSpec::Symmetric, 2.0f64).unwrap(),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn deriv_known_values() {
        for spec in all_kinds() {
            assert!(
                loss_deriv(&spec, 1.0f64).unwrap().abs() < 1e-15,
                "L'(1) != 0 for {spec}"
            );
            assert!(loss_eval(&spec, 1.0f64).unwrap().abs() < 1e-15);
        }
        assert_relative_eq!(
            loss_deriv(&LossSpec::Symmetric, 2.0f64).unwrap(),
            0.75,
            epsilon = 1e-15
        );
        assert_eq!(
            loss_deriv(&LossSpec::linex(-1.0f64).unwrap(), 1.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn domain_errors_on_nonpositive_t() {
        for spec in all_kinds() {
            assert!(loss_eval(&spec, 0.0f64).is_err());
            assert!(loss_eval(&spec, -1.0f64).is_err());
            assert!(loss_deriv(&spec, 0.0f64).is_err());
        }
    }

    #[test]
    fn validity_matrix() {
        assert!(validate_loss_domain(&LossSpec::Symmetric, 7.0f64, 2.0).is_ok());
        let issue = validate_loss_domain(&LossSpec::Symmetric, 4.0f64, 2.0).unwrap_err();
        assert!(issue.to_string().contains("a−2k≤0"), "{issue}");
        let issue = validate_loss_domain(&LossSpec::linex(1.0f64).unwrap(), 12.0, 2.0).unwrap_err();
        assert!(
            issue.to_string().contains("divergent linex integrand"),
            "{issue}"
        );
        assert!(validate_loss_domain(&LossSpec::linex(-1.0f64).unwrap(), 12.0, 2.0).is_ok());
        assert!(validate_loss_domain(&LossSpec::linex(1.0f64).unwrap(), 12.0, 0.5).is_ok());
        assert!(validate_loss_domain(&LossSpec::linex(1.0f64).unwrap(), 12.0, 1.0).is_ok());
        assert!(validate_loss_domain(&LossSpec::Entropy, 2.0f64, 2.0).is_err());
        assert!(validate_loss_domain(&LossSpec::Quadratic, 2.0f64, 9.0).is_ok());
    }

    #[test]
    fn selector_round_trip() {
        for s in ["squared", "entropy", "symmetric", "linex:-0.5"] {
            let spec: LossSpec<f64> = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("linex:0".parse::<LossSpec<f64>>().is_err());
        assert!("huber".parse::<LossSpec<f64>>().is_err());
    }

    proptest! {
        #[test]
        fn midpoint_convexity(t1 in 0.05f64..20.0, t2 in 0.05f64..20.0) {
            for spec in all_kinds() {
                let mid = loss_eval(&spec, 0.5 * (t1 + t2)).unwrap();
                let avg = 0.5 * (loss_eval(&spec, t1).unwrap() + loss_eval(&spec, t2).unwrap());
                prop_assert!(mid <= avg + 1e-12 * (1.0 + avg.abs()));
            }
        }

        #[test]
        fn deriv_matches_finite_differences(t in 0.1f64..10.0) {
            let h = 1e-6 * t.max(1.0);
            for spec in all_kinds() {
                let fd = (loss_eval(&spec, t + h).unwrap() - loss_eval(&spec, t - h).unwrap())
                    / (2.0 * h);
                let d = loss_deriv(&spec, t).unwrap();
                prop_assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "{spec}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn deriv_strictly_increasing_on_grid() {
        for spec in all_kinds() {
            let mut last = f64::NEG_INFINITY;
            for i in 1..200 {
                let t = 0.05 * i as f64;
                let d = loss_deriv(&spec, t).unwrap();
                assert!(d > last, "L' not increasing for {spec} at t={t}");
                last = d;
            }
        }
    }
}
