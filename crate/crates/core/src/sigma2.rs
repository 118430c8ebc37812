//! Estimators of `σ₂ᵏ`, the larger scale.
//!
//! The order restriction acts in the opposite direction here: `d21` is an
//! expansion (max-clamp) built from `W = S₁/S₂`, `d22` a shrinkage
//! (min-clamp) built from `W₁ = X₂/S₂`, and the double-shrinkage estimator
//! combines both. The Brewster–Zidek-type boundary `ξ₀₁(W)` and a Pitman
//! median-envelope truncation complete the family.

use crate::error::{Error, Result};
use crate::kernel::{baee_constant, psi_solve, MultiplierQuery};
use crate::losses::{validate_loss_domain, BowlLoss, LossKind, LossSpec};
use crate::model::{pivots, EstimationConfig, SufficientStats};
use crate::numerics::{
    expand_bracket, find_root, gamma_median, integrate_half_line, log_gamma, reg_inc_gamma_q,
    QuadratureSpec,
};
use crate::report::{EstimateReport, EstimatorId};
use crate::scalar::Real;

/// Constants of the `σ₂ᵏ` family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma2Constants<T> {
    /// BAEE multiplier, shape `p₂ + k − 1`.
    pub d02: T,
    /// Expansion constant of `d21`, shape `p₁ + p₂ + k − 2`.
    pub beta1: T,
    /// Shrinkage constant of `d22`, shape `p₂ + k`.
    pub beta2: T,
}

impl<T: Real> Sigma2Constants<T> {
    pub fn new(p1: usize, p2: usize, cfg: &EstimationConfig<T>) -> Result<Self> {
        if p1 < 2 || p2 < 2 {
            return Err(Error::Validation(format!(
                "sample sizes must be >= 2, got p1={p1}, p2={p2}"
            )));
        }
        let two = T::from(2.0).unwrap();
        let d02 = baee_constant(p2, cfg)?;
        let beta1 = psi_solve(&MultiplierQuery::new(
            T::from(p1 + p2).unwrap() + cfg.k - two,
            cfg.k,
            cfg.loss,
        )?)?;
        let beta2 = psi_solve(&MultiplierQuery::new(
            T::from(p2).unwrap() + cfg.k,
            cfg.k,
            cfg.loss,
        )?)?;
        Ok(Sigma2Constants { d02, beta1, beta2 })
    }

    /// The dominance claim of `d21` requires `β₁ < d₀₂`; report rather than
    /// enforce, since the estimator itself is well defined either way.
    pub fn delta21_condition_holds(&self) -> bool {
        self.beta1 < self.d02
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
        value: multiplier * stats.s2.powf(cfg.k),
        truncation_active,
        loss: cfg.loss,
        k: cfg.k,
    }
}

/// BAEE `d₀₂·S₂ᵏ`.
pub fn delta02<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let d02 = baee_constant(stats.p2, cfg)?;
    Ok(report(EstimatorId::D02, d02, stats, cfg, false))
}

fn delta21_multiplier<T: Real>(c: &Sigma2Constants<T>, w: T, k: T) -> (T, bool) {
    let u = c.beta1 * (T::one() + w).powf(k);
    if u > c.d02 {
        (u, false)
    } else {
        (c.d02, true)
    }
}

fn delta22_multiplier<T: Real>(c: &Sigma2Constants<T>, w1: T, k: T) -> (T, bool) {
    if w1 > T::zero() {
        let u = c.beta2 * (T::one() + w1).powf(k);
        if u < c.d02 {
            (u, true)
        } else {
            (c.d02, false)
        }
    } else {
        (c.d02, false)
    }
}

/// Expansion estimator `max{d₀₂, β₁(1+W)ᵏ}·S₂ᵏ`.
///
/// `truncation_active` marks the clamp branch, i.e. the estimate collapsed
/// back to the BAEE.
pub fn delta21<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let c = Sigma2Constants::new(stats.p1, stats.p2, cfg)?;
    let piv = pivots(stats)?;
    let (m, active) = delta21_multiplier(&c, piv.w, cfg.k);
    Ok(report(EstimatorId::D21, m, stats, cfg, active))
}

/// Shrinkage estimator `min{d₀₂, β₂(1+W₁)ᵏ}·S₂ᵏ` with the `W₁ > 0` guard.
pub fn delta22<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let c = Sigma2Constants::new(stats.p1, stats.p2, cfg)?;
    let piv = pivots(stats)?;
    let (m, active) = delta22_multiplier(&c, piv.w1, cfg.k);
    Ok(report(EstimatorId::D22, m, stats, cfg, active))
}

/// Double-shrinkage estimator `(ξ₁(W) + ξ₂(W₁) − d₀₂)·S₂ᵏ`, combining the
/// `d21` and `d22` multipliers; collapses to the BAEE when both clamps bind.
pub fn double_shrinkage<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let c = Sigma2Constants::new(stats.p1, stats.p2, cfg)?;
    let piv = pivots(stats)?;
    let (m21, a21) = delta21_multiplier(&c, piv.w, cfg.k);
    let (m22, a22) = delta22_multiplier(&c, piv.w1, cfg.k);
    let m = m21 + m22 - c.d02;
    if !(m > T::zero()) {
        // Unreachable given m21 >= d02 and m22 > 0.
        return Err(Error::InternalInvariant(format!(
            "double-shrinkage multiplier {m} is not positive"
        )));
    }
    Ok(report(EstimatorId::DoubleShrink, m, stats, cfg, a21 && a22))
}

/// `N(s) = ∫₀^∞ v^{s−1} e^{−v} Q(p₁−1, v·w) dv` for integer `p₁`, reduced to
/// the exact finite sum `Σ_{j<p₁−1} wʲ Γ(s+j) / (j! (1+w)^{s+j})`.
fn bz2_weighted_moment<T: Real>(s: T, w: T, p1: usize) -> Result<T> {
    let ln_w = w.ln();
    let ln_1w = (T::one() + w).ln();
    let mut total = T::zero();
    for j in 0..(p1 - 1) {
        let jf = T::from(j).unwrap();
        let term =
            (jf * ln_w + log_gamma(s + jf)? - log_gamma(jf + T::one())? - (s + jf) * ln_1w).exp();
        total += term;
    }
    Ok(total)
}

/// Brewster–Zidek-type boundary multiplier `ξ₀₁(w)`: the root of
/// `∫₀^∞ L'(ξ·vᵏ) v^{p₂+k−2} e^{−v} Q(p₁−1, v·w) dv = 0`.
///
/// For quadratic, entropy and symmetric losses the boundary is a ratio of
/// the weighted moments `N(s)` at shifted shapes — `(p₂+k−1, p₂+2k−1)`,
/// `(p₂−1, p₂+k−1)` and (under a square root) `(p₂−k−1, p₂+k−1)` — and the
/// sums are exact for integer sample sizes. `ξ₀₁(w) → d₀₂` as `w → 0`.
/// Other losses go through quadrature plus Brent.
pub fn bz_multiplier_sigma2<T: Real>(
    w: T,
    p1: usize,
    p2: usize,
    cfg: &EstimationConfig<T>,
) -> Result<T> {
    if p1 < 2 || p2 < 2 {
        return Err(Error::Validation(format!(
            "sample sizes must be >= 2, got p1={p1}, p2={p2}"
        )));
    }
    if !(w > T::zero()) || !w.is_finite() {
        return Err(Error::Domain(format!(
            "bz boundary requires w > 0, got {w}"
        )));
    }
    let one = T::one();
    let k = cfg.k;
    let p2t = T::from(p2).unwrap();
    // The integrand behaves like Gamma(p2+k-1) near v = 0; symmetric loss
    // additionally needs p2 - k - 1 > 0.
    validate_loss_domain(&cfg.loss, p2t + k - one, k).map_err(Error::LossDomain)?;

    let two_k = k + k;
    match cfg.loss.kind() {
        LossKind::Quadratic => {
            let num = bz2_weighted_moment(p2t + k - one, w, p1)?;
            let den = bz2_weighted_moment(p2t + two_k - one, w, p1)?;
            Ok(num / den)
        }
        LossKind::Entropy => {
            let num = bz2_weighted_moment(p2t - one, w, p1)?;
            let den = bz2_weighted_moment(p2t + k - one, w, p1)?;
            Ok(num / den)
        }
        LossKind::Symmetric => {
            let num = bz2_weighted_moment(p2t - k - one, w, p1)?;
            let den = bz2_weighted_moment(p2t + k - one, w, p1)?;
            Ok((num / den).sqrt())
        }
        LossKind::Linex => {
            let spec = QuadratureSpec::default();
            let shape = p2t + k - one;
            let lg = log_gamma(shape)?;
            let q_shape = T::from(p1 - 1).unwrap();
            let loss = cfg.loss;
            let f = |xi: T| {
                let integral = integrate_half_line(
                    |v: T| {
                        let weight = ((shape - one) * v.ln() - v - lg).exp();
                        if weight == T::zero() {
                            return T::zero();
                        }
                        let q = reg_inc_gamma_q(q_shape, v * w).unwrap_or(T::nan());
                        loss.deriv_unchecked(xi * v.powf(k)) * weight * q
                    },
                    &spec,
                );
                match integral {
                    Ok(v) => v,
                    Err(_) => T::nan(),
                }
            };
            let scale = (log_gamma(shape)? - log_gamma(shape + k)?).exp();
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
    }
}

/// Brewster–Zidek-type estimate `ξ₀₁(W)·S₂ᵏ`.
pub fn bz_estimate_sigma2<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let piv = pivots(stats)?;
    let m = bz_multiplier_sigma2(piv.w, stats.p1, stats.p2, cfg)?;
    Ok(report(EstimatorId::Bz2, m, stats, cfg, false))
}

/// Pitman-closeness truncated estimator of `σ₂ᵏ`.
///
/// `V₂ | W = w ~ Gamma(p₁+p₂−2)` with rate `1 + w/η`, so with
/// `q = gamma_median(p₁+p₂−2)` the Pitman-optimal multiplier
/// `((1+w/η)/q)ᵏ` is bounded below by `l(w) = ((1+w)/q)ᵏ` (at `η = 1`) and
/// is unbounded above as `η → 0`; the truncation is
/// `max{l(w), d₀₂}`.
pub fn pitman_estimate_sigma2<T: Real>(
    stats: &SufficientStats<T>,
    cfg: &EstimationConfig<T>,
) -> Result<EstimateReport<T>> {
    stats.validate()?;
    let d02 = baee_constant(stats.p2, cfg)?;
    let piv = pivots(stats)?;
    let q = gamma_median(T::from(stats.p1 + stats.p2).unwrap() - T::from(2.0).unwrap())?;
    let l = ((T::one() + piv.w) / q).powf(cfg.k);
    let m = l.max(d02);
    Ok(report(EstimatorId::Pitman2, m, stats, cfg, m != d02))
}
