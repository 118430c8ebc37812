//! Monte Carlo engine: sampling, risk and relative-risk-improvement (RRI)
//! estimation, and generalized Pitman closeness (GPC) probabilities over a
//! grid of scale ratios `η = σ₁/σ₂ ∈ (0, 1]`.
//!
//! Reproducibility contract: replication `r` of grid point `e` draws from an
//! independent stream derived by a counter-based construction (SplitMix64)
//! from `(seed, e, r)`. Replications are partitioned into fixed-size blocks;
//! blocks may run on any number of worker threads but partial sums are
//! merged in block order, so identical configurations produce bit-identical
//! output regardless of thread count. All estimators within one
//! `(η, replication)` share the same sampled dataset (common random
//! numbers), and RRI is always computed against the matching BAEE on those
//! shared replications.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::losses::{BowlLoss, LossSpec};
use crate::model::{EstimationConfig, Pivots, SufficientStats};
use crate::numerics::gamma_median;
use crate::report::{EstimatorId, Target};
use crate::scalar::Real;
use crate::sigma1::{self, Sigma1Constants};
use crate::sigma2::{self, Sigma2Constants};

const BLOCK_SIZE: usize = 4096;
const MAX_RESAMPLE_ATTEMPTS: u32 = 100;

/// Full description of one simulation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub p1: usize,
    pub p2: usize,
    pub mu1: T,
    pub mu2: T,
    /// Reference scale of the second population; `σ₁ = η·σ₂`.
    pub sigma2: T,
    pub eta_grid: Vec<T>,
    pub k: T,
    pub losses: Vec<LossSpec<T>>,
    pub estimators: Vec<EstimatorId>,
    pub reps: usize,
    pub seed: u64,
}

/// Default η grid: 20 equispaced points on [0.05, 1.0].
pub fn default_eta_grid<T: Real>() -> Vec<T> {
    let step = T::from(0.05).unwrap();
    (1..=20).map(|i| step * T::from(i).unwrap()).collect()
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.p1 < 2 || self.p2 < 2 {
            return Err(Error::Validation(format!(
                "sample sizes must be >= 2, got p1={}, p2={}",
                self.p1, self.p2
            )));
        }
        if !self.mu1.is_finite() || !self.mu2.is_finite() {
            return Err(Error::Validation("locations must be finite".into()));
        }
        if !(self.sigma2 > T::zero()) || !self.sigma2.is_finite() {
            return Err(Error::Validation(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if !(self.k > T::zero()) || !self.k.is_finite() {
            return Err(Error::Validation(format!(
                "k must be positive, got {}",
                self.k
            )));
        }
        if self.eta_grid.is_empty() {
            return Err(Error::Validation("eta grid must not be empty".into()));
        }
        for &eta in &self.eta_grid {
            if !(eta > T::zero() && eta <= T::one()) {
                return Err(Error::Validation(format!(
                    "eta must lie in (0, 1] to respect the order restriction, got {eta}"
                )));
            }
        }
        if self.losses.is_empty() {
            return Err(Error::Validation("at least one loss is required".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Validation(
                "at least one estimator is required".into(),
            ));
        }
        for (i, id) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(id) {
                return Err(Error::Validation(format!("duplicate estimator {id}")));
            }
        }
        if self.reps < 1000 {
            return Err(Error::Validation(format!(
                "reps must be >= 1000 for standard-error validity, got {}",
                self.reps
            )));
        }
        Ok(())
    }
}

/// Risk summary of one `(η, loss, estimator)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct RiskRow<T> {
    pub eta: T,
    pub estimator: EstimatorId,
    pub loss: LossSpec<T>,
    /// Monte Carlo risk estimate `(1/N) Σ L(δ/σᵏ)`.
    pub risk: T,
    /// `100·(risk_baee − risk)/risk_baee` on shared replications.
    pub rri: T,
    /// Standard error of `risk`.
    pub mc_se: T,
    /// Delta-method standard error of `rri` (accounts for the common
    /// random numbers shared with the baseline).
    pub rri_se: T,
    pub reps: usize,
    pub seed: u64,
}

/// Simulation sweep result.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput<T> {
    pub rows: Vec<RiskRow<T>>,
    /// Degenerate draws that were resampled (expected: zero).
    pub degenerate_resamples: u64,
}

/// GPC estimate of one `(η, loss)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real + Serialize"))]
pub struct GpcRow<T> {
    pub eta: T,
    pub loss: LossSpec<T>,
    /// `P[L(δ_a/σᵏ) < L(δ_b/σᵏ)] + ½·P[=]`.
    pub probability: T,
    pub se: T,
    pub reps: usize,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Counter-based stream.
// ---------------------------------------------------------------------------

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 stream addressed by `(seed, grid index, replication)`.
///
/// Streams for distinct addresses are independent regardless of how
/// replications are partitioned across threads.
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn for_replication(seed: u64, grid_index: u64, replication: u64) -> Self {
        let mut h = mix64(seed ^ GOLDEN);
        h = mix64(h ^ grid_index.wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
        h = mix64(h ^ replication.wrapping_mul(0x1656_67B1_9E37_79F9));
        Stream { state: h }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

/// One shifted-exponential draw `μ + σ·Exp(1)` via the inverse CDF.
#[inline]
fn draw_shifted_exp<T: Real>(mu: T, sigma: T, stream: &mut Stream) -> T {
    let u = stream.next_unit();
    mu - sigma * T::from((1.0 - u).ln()).unwrap()
}

/// `p` draws from the shifted exponential with location `mu` and scale
/// `sigma` (`σ → 0⁺` collapses every draw to `mu`).
pub fn sample_population<T: Real>(p: usize, mu: T, sigma: T, stream: &mut Stream) -> Vec<T> {
    (0..p)
        .map(|_| draw_shifted_exp(mu, sigma, stream))
        .collect()
}

/// Sample both populations and reduce on the fly (no allocation).
fn sample_stats<T: Real>(
    p1: usize,
    p2: usize,
    mu1: T,
    sigma1: T,
    mu2: T,
    sigma2: T,
    stream: &mut Stream,
) -> SufficientStats<T> {
    let mut min1 = T::infinity();
    let mut sum1 = T::zero();
    for _ in 0..p1 {
        let x = draw_shifted_exp(mu1, sigma1, stream);
        min1 = min1.min(x);
        sum1 += x;
    }
    let mut min2 = T::infinity();
    let mut sum2 = T::zero();
    for _ in 0..p2 {
        let x = draw_shifted_exp(mu2, sigma2, stream);
        min2 = min2.min(x);
        sum2 += x;
    }
    SufficientStats {
        x1: min1,
        x2: min2,
        s1: sum1 - T::from(p1).unwrap() * min1,
        s2: sum2 - T::from(p2).unwrap() * min2,
        p1,
        p2,
    }
}

// ---------------------------------------------------------------------------
// Per-loss multiplier engine with precomputed constants.
// ---------------------------------------------------------------------------

struct MultiplierEngine<T> {
    cfg: EstimationConfig<T>,
    p1: usize,
    p2: usize,
    ids: Vec<EstimatorId>,
    base1: Option<usize>,
    base2: Option<usize>,
    c1: Option<Sigma1Constants<T>>,
    d01: Option<T>,
    c2: Option<Sigma2Constants<T>>,
    /// `gamma_median(p1 + p2 − 2)` for the Pitman truncations.
    q_med: Option<T>,
    /// PCAEE multiplier `gamma_median(p1 − 1)^{−k}`.
    m01: Option<T>,
}

impl<T: Real> MultiplierEngine<T> {
    /// Evaluation id order: baselines first, then the requested set.
    fn id_order(requested: &[EstimatorId]) -> (Vec<EstimatorId>, Option<usize>, Option<usize>) {
        let mut ids = Vec::new();
        if requested.iter().any(|i| i.target() == Target::Sigma1) {
            ids.push(EstimatorId::D01);
        }
        if requested.iter().any(|i| i.target() == Target::Sigma2) {
            ids.push(EstimatorId::D02);
        }
        for &id in requested {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        let base1 = ids.iter().position(|&i| i == EstimatorId::D01);
        let base2 = ids.iter().position(|&i| i == EstimatorId::D02);
        (ids, base1, base2)
    }

    fn new(
        p1: usize,
        p2: usize,
        cfg: EstimationConfig<T>,
        requested: &[EstimatorId],
    ) -> Result<Self> {
        use EstimatorId::*;
        let (ids, base1, base2) = Self::id_order(requested);
        let needs_stein = ids.iter().any(|i| matches!(i, D11 | D12 | D13 | D14));
        let needs_d01 = base1.is_some();
        let needs_s2 = ids
            .iter()
            .any(|i| matches!(i, D02 | D21 | D22 | DoubleShrink));
        let needs_q = ids
            .iter()
            .any(|i| matches!(i, Pitman1 | Pitman1Pcaee | Pitman2));
        let needs_m01 = ids.iter().any(|i| matches!(i, Pitman1Pcaee | Pcaee1));

        let c1 = if needs_stein {
            Some(Sigma1Constants::new(p1, p2, &cfg)?)
        } else {
            None
        };
        let d01 = if needs_d01 {
            Some(match &c1 {
                Some(c) => c.d01,
                None => crate::kernel::baee_constant(p1, &cfg)?,
            })
        } else {
            None
        };
        let c2 = if needs_s2 {
            Some(Sigma2Constants::new(p1, p2, &cfg)?)
        } else {
            None
        };
        let q_med = if needs_q {
            Some(gamma_median(T::from(p1 + p2 - 2).unwrap())?)
        } else {
            None
        };
        let m01 = if needs_m01 {
            Some(gamma_median(T::from(p1 - 1).unwrap())?.powf(-cfg.k))
        } else {
            None
        };
        // Surface loss-domain problems of the boundary estimators at
        // configuration time instead of mid-sweep.
        if ids.contains(&Bz1) {
            sigma1::bz_multiplier_sigma1(T::one(), p1, p2, &cfg)?;
        }
        if ids.contains(&Bz2) {
            sigma2::bz_multiplier_sigma2(T::one(), p1, p2, &cfg)?;
        }
        Ok(MultiplierEngine {
            cfg,
            p1,
            p2,
            ids,
            base1,
            base2,
            c1,
            d01,
            c2,
            q_med,
            m01,
        })
    }

    fn multiplier(&self, id: EstimatorId, piv: &Pivots<T>) -> Result<T> {
        use EstimatorId::*;
        let one = T::one();
        let k = self.cfg.k;
        Ok(match id {
            D01 => self.d01.unwrap(),
            D11 | D12 | D13 | D14 => {
                let c = self.c1.as_ref().unwrap();
                let p1 = T::from(self.p1).unwrap();
                let p2 = T::from(self.p2).unwrap();
                let u =
                    match id {
                        D11 => Some(c.alpha1 * (one + piv.t).powf(k)),
                        D12 => (piv.t1 > T::zero())
                            .then(|| c.alpha2 * (one + piv.t + p1 * piv.t1).powf(k)),
                        D13 => (piv.t2 > T::zero())
                            .then(|| c.alpha2 * (one + piv.t + p2 * piv.t2).powf(k)),
                        _ => (piv.t1 > T::zero() && piv.t2 > T::zero())
                            .then(|| c.alpha4 * (one + piv.t + p1 * piv.t1 + p2 * piv.t2).powf(k)),
                    };
                match u {
                    Some(u) if u < c.d01 => u,
                    _ => c.d01,
                }
            }
            Bz1 => sigma1::bz_multiplier_sigma1(piv.t, self.p1, self.p2, &self.cfg)?,
            Pitman1 => {
                let q = self.q_med.unwrap();
                let l = q.powf(-k);
                let u = ((one + piv.t) / q).powf(k);
                l.max(self.d01.unwrap().min(u))
            }
            Pitman1Pcaee => {
                let q = self.q_med.unwrap();
                let u = ((one + piv.t) / q).powf(k);
                self.m01.unwrap().min(u)
            }
            Pcaee1 => self.m01.unwrap(),
            D02 => self.c2.as_ref().unwrap().d02,
            D21 => {
                let c = self.c2.as_ref().unwrap();
                c.d02.max(c.beta1 * (one + piv.w).powf(k))
            }
            D22 => {
                let c = self.c2.as_ref().unwrap();
                if piv.w1 > T::zero() {
                    c.d02.min(c.beta2 * (one + piv.w1).powf(k))
                } else {
                    c.d02
                }
            }
            DoubleShrink => {
                let c = self.c2.as_ref().unwrap();
                let m21 = c.d02.max(c.beta1 * (one + piv.w).powf(k));
                let m22 = if piv.w1 > T::zero() {
                    c.d02.min(c.beta2 * (one + piv.w1).powf(k))
                } else {
                    c.d02
                };
                m21 + m22 - c.d02
            }
            Bz2 => sigma2::bz_multiplier_sigma2(piv.w, self.p1, self.p2, &self.cfg)?,
            Pitman2 => {
                let q = self.q_med.unwrap();
                let d02 = self.c2.as_ref().map(|c| c.d02).unwrap();
                (((one + piv.w) / q).powf(k)).max(d02)
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Risk simulation.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Acc<T> {
    sum: T,
    sum_sq: T,
    cross: T,
}

impl<T: Real> Acc<T> {
    fn zero() -> Self {
        Acc {
            sum: T::zero(),
            sum_sq: T::zero(),
            cross: T::zero(),
        }
    }
}

struct BlockOut<T> {
    acc: Vec<Acc<T>>,
    degenerate: u64,
}

fn sample_valid_stats<T: Real>(
    cfg: &SimConfig<T>,
    sigma1: T,
    stream: &mut Stream,
) -> Result<(SufficientStats<T>, u64)> {
    for failed in 0..MAX_RESAMPLE_ATTEMPTS {
        let stats = sample_stats(cfg.p1, cfg.p2, cfg.mu1, sigma1, cfg.mu2, cfg.sigma2, stream);
        if stats.s1 > T::zero() && stats.s2 > T::zero() {
            return Ok((stats, u64::from(failed)));
        }
    }
    Err(Error::DegenerateData(format!(
        "{MAX_RESAMPLE_ATTEMPTS} consecutive degenerate draws; check sigma2/eta"
    )))
}

fn run_block<T: Real>(
    cfg: &SimConfig<T>,
    engines: &[MultiplierEngine<T>],
    n_ids: usize,
    eta_idx: usize,
    eta: T,
    rep_lo: usize,
    rep_hi: usize,
) -> Result<BlockOut<T>> {
    let sigma1 = eta * cfg.sigma2;
    let sig1k = sigma1.powf(cfg.k);
    let sig2k = cfg.sigma2.powf(cfg.k);
    let mut acc = vec![Acc::<T>::zero(); engines.len() * n_ids];
    let mut losses_scratch = vec![T::zero(); n_ids];
    let mut degenerate = 0u64;
    for rep in rep_lo..rep_hi {
        let mut stream = Stream::for_replication(cfg.seed, eta_idx as u64, rep as u64);
        let (stats, resamples) = sample_valid_stats(cfg, sigma1, &mut stream)?;
        degenerate += resamples;
        let piv = Pivots {
            t: stats.s2 / stats.s1,
            t1: stats.x1 / stats.s1,
            t2: stats.x2 / stats.s1,
            w: stats.s1 / stats.s2,
            w1: stats.x2 / stats.s2,
        };
        let s1k = stats.s1.powf(cfg.k);
        let s2k = stats.s2.powf(cfg.k);
        for (li, engine) in engines.iter().enumerate() {
            for (ei, &id) in engine.ids.iter().enumerate() {
                let m = engine.multiplier(id, &piv)?;
                let ratio = match id.target() {
                    Target::Sigma1 => m * s1k / sig1k,
                    Target::Sigma2 => m * s2k / sig2k,
                };
                losses_scratch[ei] = engine.cfg.loss.eval_unchecked(ratio);
            }
            let l0_1 = engine.base1.map(|i| losses_scratch[i]);
            let l0_2 = engine.base2.map(|i| losses_scratch[i]);
            for (ei, &id) in engine.ids.iter().enumerate() {
                let l = losses_scratch[ei];
                let l0 = match id.target() {
                    Target::Sigma1 => l0_1.unwrap(),
                    Target::Sigma2 => l0_2.unwrap(),
                };
                let a = &mut acc[li * n_ids + ei];
                a.sum += l;
                a.sum_sq += l * l;
                a.cross += l * l0;
            }
        }
    }
    Ok(BlockOut { acc, degenerate })
}

/// Monte Carlo risk/RRI sweep. Rows are ordered η (grid order), then loss
/// (config order), then estimator (config order).
pub fn simulate_risk<T: Real>(cfg: &SimConfig<T>) -> Result<SimulationOutput<T>> {
    cfg.validate()?;
    let ecfgs: Vec<EstimationConfig<T>> = cfg
        .losses
        .iter()
        .map(|&loss| EstimationConfig::new(cfg.k, loss))
        .collect::<Result<_>>()?;
    let engines: Vec<MultiplierEngine<T>> = ecfgs
        .iter()
        .map(|ec| MultiplierEngine::new(cfg.p1, cfg.p2, *ec, &cfg.estimators))
        .collect::<Result<_>>()?;
    let n_ids = engines[0].ids.len();
    let n = cfg.reps;
    let n_t = T::from(n).unwrap();
    let n_blocks = n.div_ceil(BLOCK_SIZE);

    let mut rows = Vec::with_capacity(cfg.eta_grid.len() * cfg.losses.len() * cfg.estimators.len());
    let mut degenerate_total = 0u64;
    let hundred = T::from(100.0).unwrap();

    for (eta_idx, &eta) in cfg.eta_grid.iter().enumerate() {
        let blocks: Vec<BlockOut<T>> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK_SIZE;
                let hi = ((b + 1) * BLOCK_SIZE).min(n);
                run_block(cfg, &engines, n_ids, eta_idx, eta, lo, hi)
            })
            .collect::<Result<_>>()?;
        // Merge in block order for thread-count independence.
        let mut acc = vec![Acc::<T>::zero(); engines.len() * n_ids];
        for block in &blocks {
            degenerate_total += block.degenerate;
            for (a, b) in acc.iter_mut().zip(&block.acc) {
                a.sum += b.sum;
                a.sum_sq += b.sum_sq;
                a.cross += b.cross;
            }
        }

        for (li, engine) in engines.iter().enumerate() {
            let cell = |idx: usize| &acc[li * n_ids + idx];
            for &id in &cfg.estimators {
                let ei = engine.ids.iter().position(|&i| i == id).unwrap();
                let a = cell(ei);
                let risk = a.sum / n_t;
                let var = (a.sum_sq - n_t * risk * risk) / (n_t - T::one());
                let mc_se = (var / n_t).max(T::zero()).sqrt();
                let base_idx = match id.target() {
                    Target::Sigma1 => engine.base1.unwrap(),
                    Target::Sigma2 => engine.base2.unwrap(),
                };
                let (rri, rri_se) = if ei == base_idx {
                    (T::zero(), T::zero())
                } else {
                    let b = cell(base_idx);
                    let r0 = b.sum / n_t;
                    let var0 = (b.sum_sq - n_t * r0 * r0) / (n_t - T::one());
                    let cov = (a.cross - n_t * risk * r0) / (n_t - T::one());
                    let rri = hundred * (r0 - risk) / r0;
                    // Delta method for risk/r0 under common random numbers.
                    let g = risk / r0;
                    let var_ratio = (var / n_t) / (r0 * r0) + g * g * (var0 / n_t) / (r0 * r0)
                        - (g + g) * (cov / n_t) / (r0 * r0);
                    (rri, hundred * var_ratio.max(T::zero()).sqrt())
                };
                rows.push(RiskRow {
                    eta,
                    estimator: id,
                    loss: engine.cfg.loss,
                    risk,
                    rri,
                    mc_se,
                    rri_se,
                    reps: n,
                    seed: cfg.seed,
                });
            }
        }
    }
    Ok(SimulationOutput {
        rows,
        degenerate_resamples: degenerate_total,
    })
}

// ---------------------------------------------------------------------------
// Generalized Pitman closeness.
// ---------------------------------------------------------------------------

/// Monte Carlo GPC of `est_a` relative to `est_b` for the given target, per
/// `(η, loss)`. Ties score 1/2 and are counted exactly.
pub fn gpc_estimate<T: Real>(
    cfg: &SimConfig<T>,
    est_a: EstimatorId,
    est_b: EstimatorId,
    target: Target,
) -> Result<Vec<GpcRow<T>>> {
    cfg.validate()?;
    if est_a.target() != target || est_b.target() != target {
        return Err(Error::Validation(format!(
            "GPC estimators must both target {target:?}, got {est_a} and {est_b}"
        )));
    }
    let requested = [est_a, est_b];
    let engines: Vec<MultiplierEngine<T>> = cfg
        .losses
        .iter()
        .map(|&loss| {
            MultiplierEngine::new(
                cfg.p1,
                cfg.p2,
                EstimationConfig::new(cfg.k, loss)?,
                &requested,
            )
        })
        .collect::<Result<_>>()?;
    let n = cfg.reps;
    let n_t = T::from(n).unwrap();
    let n_blocks = n.div_ceil(BLOCK_SIZE);
    let half = T::from(0.5).unwrap();

    let mut rows = Vec::with_capacity(cfg.eta_grid.len() * cfg.losses.len());
    for (eta_idx, &eta) in cfg.eta_grid.iter().enumerate() {
        let sums: Vec<Vec<(T, T)>> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK_SIZE;
                let hi = ((b + 1) * BLOCK_SIZE).min(n);
                let sigma1 = eta * cfg.sigma2;
                let sig1k = sigma1.powf(cfg.k);
                let sig2k = cfg.sigma2.powf(cfg.k);
                let mut out = vec![(T::zero(), T::zero()); engines.len()];
                for rep in lo..hi {
                    let mut stream = Stream::for_replication(cfg.seed, eta_idx as u64, rep as u64);
                    let (stats, _) = sample_valid_stats(cfg, sigma1, &mut stream)?;
                    let piv = Pivots {
                        t: stats.s2 / stats.s1,
                        t1: stats.x1 / stats.s1,
                        t2: stats.x2 / stats.s1,
                        w: stats.s1 / stats.s2,
                        w1: stats.x2 / stats.s2,
                    };
                    let (sik, sigk) = match target {
                        Target::Sigma1 => (stats.s1.powf(cfg.k), sig1k),
                        Target::Sigma2 => (stats.s2.powf(cfg.k), sig2k),
                    };
                    for (li, engine) in engines.iter().enumerate() {
                        let ma = engine.multiplier(est_a, &piv)?;
                        let mb = engine.multiplier(est_b, &piv)?;
                        let la = engine.cfg.loss.eval_unchecked(ma * sik / sigk);
                        let lb = engine.cfg.loss.eval_unchecked(mb * sik / sigk);
                        let score = if la < lb {
                            T::one()
                        } else if la == lb {
                            half
                        } else {
                            T::zero()
                        };
                        out[li].0 += score;
                        out[li].1 += score * score;
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (li, engine) in engines.iter().enumerate() {
            let mut sum = T::zero();
            let mut sum_sq = T::zero();
            for block in &sums {
                sum += block[li].0;
                sum_sq += block[li].1;
            }
            let p = sum / n_t;
            let var = (sum_sq - n_t * p * p) / (n_t - T::one());
            rows.push(GpcRow {
                eta,
                loss: engine.cfg.loss,
                probability: p,
                se: (var / n_t).max(T::zero()).sqrt(),
                reps: n,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}
