//! Data ingestion, sufficient-statistic reduction, pivots, estimation
//! configuration, and the Kolmogorov–Smirnov check for the shifted
//! exponential fit.
//!
//! For population `i` with observations `x_{i1}, …, x_{ip_i}` the complete
//! sufficient reduction is `Xᵢ = min_j x_{ij}` together with the centered sum
//! `Sᵢ = Σ_j (x_{ij} − Xᵢ) ~ Gamma(pᵢ − 1, σᵢ)`; each population therefore
//! needs at least two observations and a strictly positive spread.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::losses::{validate_loss_domain, LossSpec};
use crate::scalar::Real;

/// Raw two-sample input.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset<T> {
    pub pop1: Vec<T>,
    pub pop2: Vec<T>,
}

/// Minima, centered sums and sample sizes: the entire data reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientStats<T> {
    pub x1: T,
    pub x2: T,
    pub s1: T,
    pub s2: T,
    pub p1: usize,
    pub p2: usize,
}

/// Scale-free ratios whose joint law depends only on `η = σ₁/σ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pivots<T> {
    /// `S₂/S₁`
    pub t: T,
    /// `X₁/S₁`
    pub t1: T,
    /// `X₂/S₁`
    pub t2: T,
    /// `S₁/S₂`
    pub w: T,
    /// `X₂/S₂`
    pub w1: T,
}

/// The estimand power `k > 0` and the loss in force.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct EstimationConfig<T> {
    pub k: T,
    pub loss: LossSpec<T>,
}

impl<T: Real> EstimationConfig<T> {
    /// Rejects nonpositive or non-finite `k`. Loss/shape compatibility is
    /// checked where shapes are known, i.e. in each estimator constructor.
    pub fn new(k: T, loss: LossSpec<T>) -> Result<Self> {
        if !(k > T::zero()) || !k.is_finite() {
            return Err(Error::Validation(format!(
                "k must be a positive finite power, got {k}"
            )));
        }
        Ok(EstimationConfig { k, loss })
    }
}

impl<T: Real> SufficientStats<T> {
    /// Sanity gate used by every estimator entry point.
    pub fn validate(&self) -> Result<()> {
        if self.p1 < 2 || self.p2 < 2 {
            return Err(Error::Validation(format!(
                "each population needs at least 2 observations, got p1={}, p2={}",
                self.p1, self.p2
            )));
        }
        for (name, v) in [
            ("x1", self.x1),
            ("x2", self.x2),
            ("s1", self.s1),
            ("s2", self.s2),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("statistic {name} is not finite")));
            }
        }
        if !(self.s1 > T::zero()) || !(self.s2 > T::zero()) {
            return Err(Error::DegenerateData(format!(
                "centered sums must be positive, got s1={}, s2={}",
                self.s1, self.s2
            )));
        }
        Ok(())
    }
}

fn reduce_population<T: Real>(values: &[T], which: usize) -> Result<(T, T)> {
    if values.len() < 2 {
        return Err(Error::Validation(format!(
            "population {which} has {} observation(s) (need at least 2)",
            values.len()
        )));
    }
    let mut min = values[0];
    for &v in values {
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "population {which} contains a non-finite value"
            )));
        }
        if v < min {
            min = v;
        }
    }
    let mut spread = T::zero();
    for &v in values {
        spread += v - min;
    }
    if !(spread > T::zero()) {
        return Err(Error::DegenerateData(format!(
            "population {which}: all observations equal ({min}); the scale statistic is zero"
        )));
    }
    Ok((min, spread))
}

/// Reduce a dataset to its sufficient statistics.
pub fn summarize<T: Real>(data: &RawDataset<T>) -> Result<SufficientStats<T>> {
    let (x1, s1) = reduce_population(&data.pop1, 1)?;
    let (x2, s2) = reduce_population(&data.pop2, 2)?;
    Ok(SufficientStats {
        x1,
        x2,
        s1,
        s2,
        p1: data.pop1.len(),
        p2: data.pop2.len(),
    })
}

/// The five scale-free ratios.
pub fn pivots<T: Real>(stats: &SufficientStats<T>) -> Result<Pivots<T>> {
    stats.validate()?;
    Ok(Pivots {
        t: stats.s2 / stats.s1,
        t1: stats.x1 / stats.s1,
        t2: stats.x2 / stats.s1,
        w: stats.s1 / stats.s2,
        w1: stats.x2 / stats.s2,
    })
}

/// CDF of the shifted exponential with the given location and rate.
pub fn shifted_exp_cdf<T: Real>(x: T, location: T, rate: T) -> T {
    if x <= location {
        T::zero()
    } else {
        T::one() - (-(rate * (x - location))).exp()
    }
}

/// Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTestReport<T> {
    pub statistic: T,
    pub p_value: T,
}

/// One-sample KS test of `sample` against the shifted exponential CDF.
///
/// The p-value uses the Kolmogorov series `2 Σ (−1)^{j−1} exp(−2 j² λ²)` at
/// `λ = D·(√n + 0.12 + 0.11/√n)` (the standard small-sample continuity
/// adjustment), truncated at 100 terms or when a term drops below 1e-12.
pub fn ks_test<T: Real>(sample: &[T], location: T, rate: T) -> Result<KsTestReport<T>> {
    if sample.is_empty() {
        return Err(Error::Validation(
            "KS test requires a non-empty sample".into(),
        ));
    }
    if !(rate > T::zero()) || !rate.is_finite() || !location.is_finite() {
        return Err(Error::Validation(format!(
            "KS test requires finite location and rate > 0, got location={location}, rate={rate}"
        )));
    }
    let mut xs: Vec<T> = sample.to_vec();
    if xs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation(
            "KS sample contains a non-finite value".into(),
        ));
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = T::from(xs.len()).unwrap();
    let mut d = T::zero();
    for (i, &x) in xs.iter().enumerate() {
        let f = shifted_exp_cdf(x, location, rate);
        let hi = (T::from(i + 1).unwrap() / n - f).abs();
        let lo = (T::from(i).unwrap() / n - f).abs();
        d = d.max(hi).max(lo);
    }
    let sqrt_n = n.sqrt();
    let lambda = d * (sqrt_n + T::from(0.12).unwrap() + T::from(0.11).unwrap() / sqrt_n);
    let mut p = T::zero();
    let two = T::from(2.0).unwrap();
    let mut sign = T::one();
    for j in 1..=100usize {
        let jj = T::from(j).unwrap();
        let term = (-(two * jj * jj * lambda * lambda)).exp();
        p += sign * term;
        if term < T::from(1e-12).unwrap() {
            break;
        }
        sign = -sign;
    }
    let p = (two * p).max(T::zero()).min(T::one());
    Ok(KsTestReport {
        statistic: d,
        p_value: p,
    })
}

/// Parse the documented CSV contract: header `population,value`, population
/// in {1, 2}, rows in any order.
pub fn parse_csv<T: Real>(text: &str) -> Result<RawDataset<T>> {
    let mut pop1 = Vec::new();
    let mut pop2 = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_start_matches('\u{feff}').trim();
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if !normalized.eq_ignore_ascii_case("population,value") {
                return Err(Error::Validation(format!(
                    "line {line_no}: expected header \"population,value\", got {line:?}"
                )));
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let pop = fields.next().map(str::trim).unwrap_or("");
        let value = fields.next().map(str::trim);
        if value.is_none() || fields.next().is_some() {
            return Err(Error::Validation(format!(
                "line {line_no}: expected exactly 2 fields, got {line:?}"
            )));
        }
        let value = value.unwrap();
        let v: f64 = value
            .parse()
            .map_err(|_| Error::Validation(format!("line {line_no}: invalid value {value:?}")))?;
        if !v.is_finite() {
            return Err(Error::Validation(format!(
                "line {line_no}: non-finite value {value:?}"
            )));
        }
        let v = T::from(v)
            .ok_or_else(|| Error::Validation(format!("line {line_no}: value not representable")))?;
        match pop {
            "1" => pop1.push(v),
            "2" => pop2.push(v),
            other => {
                return Err(Error::Validation(format!(
                    "line {line_no}: population must be 1 or 2, got {other:?}"
                )))
            }
        }
    }
    if !saw_header {
        return Err(Error::Validation(
            "empty input: missing \"population,value\" header".into(),
        ));
    }
    Ok(RawDataset { pop1, pop2 })
}

/// Gate an estimation config against every gamma shape a given estimator
/// family will use; convenience wrapper over [`validate_loss_domain`].
pub fn check_shapes<T: Real>(cfg: &EstimationConfig<T>, shapes: &[T]) -> Result<()> {
    for &a in shapes {
        validate_loss_domain(&cfg.loss, a, cfg.k).map_err(Error::LossDomain)?;
    }
    Ok(())
}
