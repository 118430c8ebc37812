//! Estimators of `σ₁ᵏ`, the smaller scale.
//!
//! Under the order restriction `σ₁ ≤ σ₂` the BAEE `d₀₁·S₁ᵏ` is dominated by
//! min-clamped Stein-type multipliers built from the pivots `T = S₂/S₁`,
//! `T₁ = X₁/S₁`, `T₂ = X₂/S₁`, by the smooth Brewster–Zidek-type boundary
//! `φ₀₁(T)`, and (in the Pitman-closeness sense) by median-envelope
//! truncations.

use crate::error::{Error, Result};
use crate::kernel::{baee_constant, psi_solve, MultiplierQuery};
use crate::losses::{validate_loss_domain, BowlLoss, LossKind, LossSpec};
use crate::model::{pivots, EstimationConfig, SufficientStats};
use crate::numerics::{
    expand_bracket, find_root, gamma_median, integrate_half_line, log_gamma, reg_inc_beta,
    reg_inc_gamma_p, QuadratureSpec,
};
use crate::report::{EstimateReport, EstimatorId};
use crate::scalar::Real;

/// Constants shared by the `σ₁ᵏ` truncation family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma1Constants<T> {
    /// BAEE multiplier, shape `p₁ + k − 1`.
    pub d01: T,
    /// Truncation constant of `d11`, shape `p₁ + p₂ + k − 2`.
    pub alpha1: T,
    /// Truncation constant of `d12`/`d13`, shape `p₁ + p₂ + k − 1`.
    pub alpha2: T,
    /// Truncation constant of `d14`, shape `p₁ + p₂ + k`.
    pub alpha4: T,
}

impl<T: Real> Sigma1Constants<T> {
    pub fn new(p1: usize, p2: usize, cfg: &EstimationConfig<T>) -> Result<Self> {
        if p1 < 2 || p2 < 2 {
            return Err(Error::Validation(format!(
                "sample sizes must be >= 2, got p1={p1}, p2={p2}"
            )));
        }
        let one = T::one();
        let two = T::from(2.0).unwrap();
        let p12 = T::from(p1 + p2).unwrap();
        let d01 = baee_constant(p1, cfg)?;
        let alpha1 = psi_solve(&MultiplierQuery::new(p12 + cfg.k - two, cfg.k, cfg.loss)?)?;
        let alpha2 = psi_solve(&MultiplierQuery::new(p12 + cfg.k - one, cfg.k, cfg.loss)?)?;
        let alpha4 = psi_solve(&MultiplierQuery::new(p12 + cfg.k, cfg.k, cfg.loss)?)?;
        Ok(Sigma1Constants {
            d01,
            alpha1,
            alpha2,
            alpha4,
        })
    }
}

fn report<T: Real>(
    id: EstimatorId,
    multiplier: T,
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
    truncation_active: bool,
) -> EstimateReport<T> {
    EstimateReport {
        estimator: id,
        multiplier,
        value: multiplier * stats.s1.powf(cfg.k),
        truncation_active,
        loss: cfg.loss,
        k: cfg.k,
    }
}

/// BAEE `d₀₁·S₁ᵏ`.
pub fn delta01<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let d01 = baee_constant(stats.p1, cfg)?;
    Ok(report(EstimatorId::D01, d01, stats, cfg, false))
}

/// The four Stein-type min-clamped variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteinVariant {
    /// `min{d₀₁, α₁(1+T)ᵏ}`
    D11,
    /// `min{d₀₁, α₂(1+T+p₁T₁)ᵏ}` when `T₁ > 0`, else BAEE
    D12,
    /// `min{d₀₁, α₂(1+T+p₂T₂)ᵏ}` when `T₂ > 0`, else BAEE
    D13,
    /// `min{d₀₁, α₄(1+T+p₁T₁+p₂T₂)ᵏ}` when `T₁ > 0` and `T₂ > 0`, else BAEE
    D14,
}

impl SteinVariant {
    fn id(&self) -> EstimatorId {
        match self {
            SteinVariant::D11 => EstimatorId::D11,
            SteinVariant::D12 => EstimatorId::D12,
            SteinVariant::D13 => EstimatorId::D13,
            SteinVariant::D14 => EstimatorId::D14,
        }
    }
}

/// Stein-type truncated estimator of `σ₁ᵏ`.
pub fn stein_sigma1<T: Real>(
    variant: SteinVariant,
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let c = Sigma1Constants::new(stats.p1, stats.p2, cfg)?;
    let piv = pivots(stats)?;
    let one = T::one();
    let p1 = T::from(stats.p1).unwrap();
    let p2 = T::from(stats.p2).unwrap();
    let unrestricted = match variant {
        SteinVariant::D11 => Some(c.alpha1 * (one + piv.t).powf(cfg.k)),
        SteinVariant::D12 => {
            (piv.t1 > T::zero()).then(|| c.alpha2 * (one + piv.t + p1 * piv.t1).powf(cfg.k))
        }
        SteinVariant::D13 => {
            (piv.t2 > T::zero()).then(|| c.alpha2 * (one + piv.t + p2 * piv.t2).powf(cfg.k))
        }
        SteinVariant::D14 => (piv.t1 > T::zero() && piv.t2 > T::zero())
            .then(|| c.alpha4 * (one + piv.t + p1 * piv.t1 + p2 * piv.t2).powf(cfg.k)),
    };
    let (m, active) = match unrestricted {
        Some(u) if u < c.d01 => (u, true),
        _ => (c.d01, false),
    };
    Ok(report(variant.id(), m, stats, cfg, active))
}

/// Inputs of the Brewster–Zidek boundary that depend only on the geometry.
struct BzShape<T> {
    /// Lower/upper beta second parameters `b = a − p₂ + 1` per loss.
    b_lo: T,
    b_hi: T,
    sqrt: bool,
}

fn bz1_shape<T: Real>(p1: usize, cfg: &EstimationConfig<T>) -> Option<BzShape<T>> {
    let one = T::one();
    let p1 = T::from(p1).unwrap();
    let k = cfg.k;
    match cfg.loss.kind() {
        LossKind::Quadratic => Some(BzShape {
            b_lo: p1 + k - one,
            b_hi: p1 + k + k - one,
            sqrt: false,
        }),
        LossKind::Entropy => Some(BzShape {
            b_lo: p1 - one,
            b_hi: p1 + k - one,
            sqrt: false,
        }),
        LossKind::Symmetric => Some(BzShape {
            b_lo: p1 - k - one,
            b_hi: p1 + k - one,
            sqrt: true,
        }),
        LossKind::Linex => None,
    }
}

/// Brewster–Zidek-type boundary multiplier `φ₀₁(t)`: the root of
/// `∫₀^∞ L'(φ·vᵏ) v^{p₁+k−2} e^{−v} P(p₂−1, v·t) dv = 0`.
///
/// For the quadratic, entropy and symmetric losses the `v` integral comes
/// out analytically and the boundary reduces to a ratio of regularized
/// incomplete beta values at `z = t/(1+t)`:
/// `φ₀₁(t) = Γ(b_lo)·I_z(p₂−1, b_lo) / (Γ(b_hi)·I_z(p₂−1, b_hi))`
/// (square-rooted for the symmetric loss), which tends to the BAEE constant
/// as `t → ∞`. Other losses go through quadrature plus Brent.
pub fn bz_multiplier_sigma1<T: Real>(
    t: T,
    p1: usize,
    p2: usize,
    cfg: &EstimationConfig<T>,
) -> Result<T> {
    if p1 < 2 || p2 < 2 {
        return Err(Error::Validation(format!(
            "sample sizes must be >= 2, got p1={p1}, p2={p2}"
        )));
    }
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "bz boundary requires t > 0, got {t}"
        )));
    }
    let one = T::one();
    let two = T::from(2.0).unwrap();
    let k = cfg.k;
    let baee_shape = T::from(p1).unwrap() + k - one;
    let cond_shape = T::from(p1 + p2).unwrap() + k - two;
    validate_loss_domain(&cfg.loss, baee_shape, k).map_err(Error::LossDomain)?;
    validate_loss_domain(&cfg.loss, cond_shape, k).map_err(Error::LossDomain)?;

    if let Some(shape) = bz1_shape(p1, cfg) {
        let a_beta = T::from(p2 - 1).unwrap();
        let z = t / (one + t);
        let i_lo = reg_inc_beta(a_beta, shape.b_lo, z)?;
        let i_hi = reg_inc_beta(a_beta, shape.b_hi, z)?;
        let lg_ratio = (log_gamma(shape.b_lo)? - log_gamma(shape.b_hi)?).exp();
        let ratio = if i_lo > T::zero() && i_hi > T::zero() {
            lg_ratio * (i_lo / i_hi)
        } else {
            // Both incomplete betas underflowed (t extremely small); use the
            // exact t -> 0 limit, a ratio of gamma values at the conditional
            // shapes a = b + p2 - 1.
            let shift = T::from(p2 - 1).unwrap();
            (log_gamma(shape.b_lo + shift)? - log_gamma(shape.b_hi + shift)?).exp()
        };
        return Ok(if shape.sqrt { ratio.sqrt() } else { ratio });
    }

    // Generic path (linex with a valid parameter combination).
    let spec = QuadratureSpec::default();
    let lg = log_gamma(cond_shape)?;
    let p2_shape = T::from(p2 - 1).unwrap();
    let exp_v = baee_shape - one;
    let loss = cfg.loss;
    let f = |phi: T| {
        let integral = integrate_half_line(
            |v: T| {
                let w = (exp_v * v.ln() - v - lg).exp();
                if w == T::zero() {
                    return T::zero();
                }
                let p = reg_inc_gamma_p(p2_shape, v * t).unwrap_or(T::nan());
                loss.deriv_unchecked(phi * v.powf(k)) * w * p
            },
            &spec,
        );
        match integral {
            Ok(v) => v,
            Err(_) => T::nan(),
        }
    };
    let scale = (log_gamma(cond_shape)? - log_gamma(cond_shape + k)?).exp();
    let hi_max = match cfg.loss {
        LossSpec::Linex { alpha } if alpha > T::zero() && k == one => {
            T::from(0.999999).unwrap() / alpha
        }
        _ => T::infinity(),
    };
    let bracket = expand_bracket(
        &f,
        scale * T::from(1e-4).unwrap(),
        (scale * T::from(1e4).unwrap()).min(hi_max),
        hi_max,
        scale * T::from(1e-11).unwrap(),
    )?;
    find_root(f, &bracket)
}

/// Brewster–Zidek-type estimate `φ₀₁(T)·S₁ᵏ`.
pub fn bz_estimate_sigma1<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let piv = pivots(stats)?;
    let m = bz_multiplier_sigma1(piv.t, stats.p1, stats.p2, cfg)?;
    Ok(report(EstimatorId::Bz1, m, stats, cfg, false))
}

/// Multiplier-scale envelope of the conditional median of `V₁ | T = t`.
///
/// `V₁ | T = t ~ Gamma(p₁+p₂−2)` with rate `1 + ηt`, so with
/// `q = gamma_median(p₁+p₂−2)` the Pitman-optimal multiplier
/// `((1+ηt)/q)ᵏ` sweeps `[l, u] = [q^{−k}, ((1+t)/q)ᵏ]` as `η` runs over
/// `(0, 1]`.
pub fn pitman_bounds_sigma1<T: Real>(t: T, p1: usize, p2: usize, k: T) -> Result<(T, T)> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "pitman bounds require t > 0, got {t}"
        )));
    }
    if !(k > T::zero()) {
        return Err(Error::Validation(format!("k must be positive, got {k}")));
    }
    let q = gamma_median(T::from(p1 + p2).unwrap() - T::from(2.0).unwrap())?;
    let l = q.powf(-k);
    let u = ((T::one() + t) / q).powf(k);
    Ok((l, u))
}

/// Which multiplier the Pitman truncation is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitmanBase {
    /// Truncate the BAEE constant `d₀₁` to the `[l, u]` envelope.
    Baee,
    /// Truncate the PCAEE constant `m₀₁` from above by `u`.
    Pcaee,
}

/// PCAEE multiplier: reciprocal `k`-th power of the `Gamma(p₁−1)` median.
fn pcaee_multiplier<T: Real>(p1: usize, k: T) -> Result<T> {
    Ok(gamma_median(T::from(p1 - 1).unwrap())?.powf(-k))
}

/// Pitman-closeness truncated estimator of `σ₁ᵏ`.
pub fn pitman_estimate_sigma1<T: Real>(
    base: PitmanBase,
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let piv = pivots(stats)?;
    let (l, u) = pitman_bounds_sigma1(piv.t, stats.p1, stats.p2, cfg.k)?;
    let (id, m0) = match base {
        PitmanBase::Baee => (EstimatorId::Pitman1, baee_constant(stats.p1, cfg)?),
        PitmanBase::Pcaee => (
            EstimatorId::Pitman1Pcaee,
            pcaee_multiplier(stats.p1, cfg.k)?,
        ),
    };
    let m = match base {
        PitmanBase::Baee => l.max(m0.min(u)),
        // m01 >= l always (medians increase with shape), so only the upper
        // clamp can bind.
        PitmanBase::Pcaee => m0.min(u),
    };
    Ok(report(id, m, stats, cfg, m != m0))
}

/// Pitman-closest affine equivariant estimator `m₀₁·S₁ᵏ` (the unrestricted
/// baseline of the Pitman comparisons).
pub fn pcaee_sigma1<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let m = pcaee_multiplier(stats.p1, cfg.k)?;
    Ok(report(EstimatorId::Pcaee1, m, stats, cfg, false))
}
