//! The single multiplier-solving primitive behind every constant in the
//! estimator families: the unique `c > 0` with `E[L'(c·Yᵏ)] = 0` for
//! `Y ~ Gamma(a, 1)`.
//!
//! The BAEE constant, the Stein truncation constants and the shrinkage
//! constants are all this function evaluated at different shapes `a` (the
//! `E[L'(d·Vᵏ)Vᵏ] = 0` form of the BAEE equation absorbs the `Vᵏ` weight
//! into the shape: `a = p + k − 1`). Quadratic, entropy and symmetric losses
//! have closed forms; other losses go through quadrature plus Brent with
//! geometric bracket growth, memoized since simulation sweeps reuse the same
//! constants millions of times.

use std::any::TypeId;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::losses::{validate_loss_domain, BowlLoss, LossKind, LossSpec};
use crate::model::EstimationConfig;
use crate::numerics::{expand_bracket, find_root, integrate_half_line, log_gamma, QuadratureSpec};
use crate::scalar::Real;

/// Shape/power/loss triple identifying one multiplier equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierQuery<T> {
    /// Gamma shape `a` of the weight `y^{a−1}e^{−y}`.
    pub shape: T,
    /// Power `k` inside `L'(c·yᵏ)`.
    pub k: T,
    pub loss: LossSpec<T>,
}

impl<T: Real> MultiplierQuery<T> {
    pub fn new(shape: T, k: T, loss: LossSpec<T>) -> Result<Self> {
        let q = MultiplierQuery { shape, k, loss };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        validate_loss_domain(&self.loss, self.shape, self.k).map_err(Error::LossDomain)
    }
}

#[derive(Hash, PartialEq, Eq)]
struct CacheKey {
    scalar: TypeId,
    shape: u64,
    k: u64,
    kind: LossKind,
    alpha: u64,
}

impl CacheKey {
    fn of<T: Real>(q: &MultiplierQuery<T>) -> Self {
        let alpha = match q.loss {
            LossSpec::Linex { alpha } => alpha.to_f64().unwrap_or(f64::NAN).to_bits(),
            _ => 0,
        };
        CacheKey {
            scalar: TypeId::of::<T>(),
            shape: q.shape.to_f64().unwrap_or(f64::NAN).to_bits(),
            k: q.k.to_f64().unwrap_or(f64::NAN).to_bits(),
            kind: q.loss.kind(),
            alpha,
        }
    }
}

fn cache() -> &'static Mutex<HashMap<CacheKey, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn closed_form<T: Real>(q: &MultiplierQuery<T>) -> Result<Option<T>> {
    let a = q.shape;
    let k = q.k;
    let two = T::from(2.0).unwrap();
    let c = match q.loss.kind() {
        LossKind::Quadratic => (log_gamma(a)? - log_gamma(a + k)?).exp(),
        LossKind::Entropy => (log_gamma(a - k)? - log_gamma(a)?).exp(),
        LossKind::Symmetric => {
            (T::from(0.5).unwrap() * (log_gamma(a - two * k)? - log_gamma(a)?)).exp()
        }
        LossKind::Linex => return Ok(None),
    };
    Ok(Some(c))
}

/// Solve `E[L'(c·Yᵏ)] = 0`, `Y ~ Gamma(shape, 1)`, for the unique `c > 0`.
///
/// Closed forms are used for quadratic, entropy and symmetric losses; linex
/// (and any future loss kind) goes through the generic quadrature path and
/// is memoized by `(shape, k, loss)`.
pub fn psi_solve<T: Real>(query: &MultiplierQuery<T>) -> Result<T> {
    query.validate()?;
    if let Some(c) = closed_form(query)? {
        return Ok(c);
    }
    let key = CacheKey::of(query);
    if let Some(&hit) = cache().lock().unwrap().get(&key) {
        return Ok(T::from(hit).unwrap());
    }
    let c = psi_solve_generic(query)?;
    cache()
        .lock()
        .unwrap()
        .insert(key, c.to_f64().unwrap_or(f64::NAN));
    Ok(c)
}

/// The quadrature-plus-Brent path, independent of the closed forms.
///
/// Exposed so the closed forms can be cross-checked against it.
pub fn psi_solve_generic<T: Real>(query: &MultiplierQuery<T>) -> Result<T> {
    query.validate()?;
    let spec = QuadratureSpec::default();
    let f = |c: T| match multiplier_residual(query, c, &spec) {
        Ok(v) => v,
        Err(_) => T::nan(),
    };
    // Default bracket [1e-10, 1], grown geometrically; for linex with k = 1
    // and alpha > 0 the solution lies below 1/alpha, so cap the growth there.
    let hi_max = match query.loss {
        LossSpec::Linex { alpha } if alpha > T::zero() && query.k == T::one() => {
            T::from(0.999999).unwrap() / alpha
        }
        _ => T::infinity(),
    };
    // Seed the scale from the quadratic closed form at the same shape.
    let scale = (log_gamma(query.shape)? - log_gamma(query.shape + query.k)?).exp();
    let lo = T::from(1e-10).unwrap().min(scale * T::from(1e-4).unwrap());
    let hi = T::one().min(hi_max);
    let tol = scale * T::from(1e-12).unwrap();
    let bracket = expand_bracket(&f, lo, hi, hi_max, tol)?;
    find_root(f, &bracket)
}

/// Normalized residual `∫ L'(c·yᵏ) y^{a−1} e^{−y} dy / Γ(a)` at a candidate
/// multiplier `c`; the returned root satisfies `|residual| < 1e-8`.
pub fn multiplier_residual<T: Real>(
    query: &MultiplierQuery<T>,
    c: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let a = query.shape;
    let k = query.k;
    let lg = log_gamma(a)?;
    let one = T::one();
    match query.loss {
        // Assemble the exponent by hand so huge shapes stay in range.
        LossSpec::Linex { alpha } => integrate_half_line(
            move |y: T| {
                let ln_w = (a - one) * y.ln() - y - lg;
                let z = alpha * (c * y.powf(k) - one);
                alpha * ((z + ln_w).exp() - ln_w.exp())
            },
            spec,
        ),
        loss => integrate_half_line(
            move |y: T| {
                let w = ((a - one) * y.ln() - y - lg).exp();
                if w == T::zero() {
                    T::zero()
                } else {
                    loss.deriv_unchecked(c * y.powf(k)) * w
                }
            },
            spec,
        ),
    }
}

/// BAEE multiplier for `σᵢᵏ` from a sample of size `p`: the root of
/// `E[L'(d·Vᵏ)Vᵏ] = 0` with `V ~ Gamma(p−1, 1)`, i.e. `psi_solve` at shape
/// `p + k − 1`.
pub fn baee_constant<T: Real>(p: usize, cfg: &EstimationConfig<T>) -> Result<T> {
    if p < 2 {
        return Err(Error::Validation(format!(
            "sample size p must be >= 2, got {p}"
        )));
    }
    let shape = T::from(p).unwrap() + cfg.k - T::one();
    psi_solve(&MultiplierQuery::new(shape, cfg.k, cfg.loss)?)
}

/// UMVUE multiplier `Γ(p−1)/Γ(p+k−1)`; identical to the entropy-loss BAEE.
pub fn umvue_constant<T: Real>(p: usize, k: T) -> Result<T> {
    if p < 2 {
        return Err(Error::Validation(format!(
            "sample size p must be >= 2, got {p}"
        )));
    }
    if !(k > T::zero()) || !k.is_finite() {
        return Err(Error::Validation(format!(
            "k must be a positive finite power, got {k}"
        )));
    }
    let p = T::from(p).unwrap();
    Ok((log_gamma(p - T::one())? - log_gamma(p + k - T::one())?).exp())
}
