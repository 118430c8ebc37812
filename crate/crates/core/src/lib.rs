//! Decision-theoretic estimation of positive powers of ordered scale
//! parameters for two shifted-exponential populations.
//!
//! Two independent samples follow the shifted (two-parameter) exponential law
//! with densities `(1/σᵢ)·exp(−(x−μᵢ)/σᵢ)` for `x > μᵢ`, with the prior
//! structural constraint `σ₁ ≤ σ₂`. The crate computes the best affine
//! equivariant estimator (BAEE) of `σᵢᵏ` (`k > 0`) under bowl-shaped
//! scale-invariant losses, together with a family of estimators that dominate
//! it by exploiting the order restriction: Stein-type truncations,
//! Brewster–Zidek-type smooth boundary estimators, double-shrinkage
//! combinations, and Pitman-closeness truncations. A Monte Carlo engine
//! estimates risks, relative risk improvements and generalized Pitman
//! closeness probabilities over a grid of scale ratios `η = σ₁/σ₂`.
//!
//! All numeric code is generic over the scalar type via [`Real`]
//! (`f32`/`f64`); concrete `f64` aliases are exported at the crate root.
//!
//! Modules, bottom up:
//!
//! | module | contents |
//! |--------|----------|
//! | [`numerics`] | log-gamma, regularized incomplete gamma/beta, gamma medians, adaptive Gauss–Kronrod quadrature, Brent root finding |
//! | [`losses`] | the bowl-shaped scale-invariant loss family and its validity gates |
//! | [`model`] | sufficient statistics, pivots, CSV ingestion, KS goodness of fit |
//! | [`kernel`] | the single multiplier-equation solver behind every constant |
//! | [`sigma1`] | estimators of `σ₁ᵏ` (the smaller scale) |
//! | [`sigma2`] | estimators of `σ₂ᵏ` (the larger scale) |
//! | [`mcrisk`] | reproducible Monte Carlo risk / RRI / GPC estimation |

// `!(x > zero)` is the NaN-rejecting form of every domain check here.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature node tables keep their full published precision.
#![allow(clippy::excessive_precision)]

pub mod error;
pub mod kernel;
pub mod losses;
pub mod mcrisk;
pub mod model;
pub mod numerics;
pub mod report;
mod scalar;
pub mod sigma1;
pub mod sigma2;

pub use error::{Error, Result};
pub use losses::{LossKind, LossSpec};
pub use model::{EstimationConfig, Pivots, RawDataset, SufficientStats};
pub use report::{EstimateReport, EstimatorId, Target};
pub use scalar::Real;

use mcrisk::{RiskRow, SimConfig};
use numerics::{QuadratureSpec, RootBracket};

/// Evaluate one estimator on a reduced dataset.
///
/// Dispatches to the specific `sigma1`/`sigma2` operation named by `id`.
pub fn evaluate_estimator<T: Real>(
    id: EstimatorId,
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    use EstimatorId::*;
    match id {
        D01 => sigma1::delta01(stats, cfg),
        D11 => sigma1::stein_sigma1(sigma1::SteinVariant::D11, stats, cfg),
        D12 => sigma1::stein_sigma1(sigma1::SteinVariant::D12, stats, cfg),
        D13 => sigma1::stein_sigma1(sigma1::SteinVariant::D13, stats, cfg),
        D14 => sigma1::stein_sigma1(sigma1::SteinVariant::D14, stats, cfg),
        Bz1 => sigma1::bz_estimate_sigma1(stats, cfg),
        Pitman1 => sigma1::pitman_estimate_sigma1(sigma1::PitmanBase::Baee, stats, cfg),
        Pitman1Pcaee => sigma1::pitman_estimate_sigma1(sigma1::PitmanBase::Pcaee, stats, cfg),
        Pcaee1 => sigma1::pcaee_sigma1(stats, cfg),
        D02 => sigma2::delta02(stats, cfg),
        D21 => sigma2::delta21(stats, cfg),
        D22 => sigma2::delta22(stats, cfg),
        DoubleShrink => sigma2::double_shrinkage(stats, cfg),
        Bz2 => sigma2::bz_estimate_sigma2(stats, cfg),
        Pitman2 => sigma2::pitman_estimate_sigma2(stats, cfg),
    }
}

// Concrete aliases for the default scalar type.
pub type LossSpec64 = LossSpec<f64>;
pub type RawDataset64 = RawDataset<f64>;
pub type SufficientStats64 = SufficientStats<f64>;
pub type Pivots64 = Pivots<f64>;
pub type EstimationConfig64 = EstimationConfig<f64>;
pub type EstimateReport64 = EstimateReport<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type RiskRow64 = RiskRow<f64>;
pub type QuadratureSpec64 = QuadratureSpec<f64>;
pub type RootBracket64 = RootBracket<f64>;
