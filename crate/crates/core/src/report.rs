//! Estimator identities and the common report struct they all return.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::Error;
use crate::losses::LossSpec;

/// Which scale power an estimator targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Target {
    Sigma1,
    Sigma2,
}

/// Every estimator the crate computes. The `d` names follow the usual
/// delta-subscript labelling of this estimator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorId {
    /// BAEE of `σ₁ᵏ`.
    D01,
    /// Stein truncation using `T` only.
    D11,
    /// Stein truncation using `T` and `T₁`.
    D12,
    /// Stein truncation using `T` and `T₂`.
    D13,
    /// Stein truncation using `T`, `T₁` and `T₂`.
    D14,
    /// Brewster–Zidek-type smooth boundary estimator of `σ₁ᵏ`.
    Bz1,
    /// Pitman-closeness truncation of the BAEE of `σ₁ᵏ`.
    Pitman1,
    /// Pitman-closeness truncation of the PCAEE of `σ₁ᵏ`.
    Pitman1Pcaee,
    /// Pitman-closest affine equivariant estimator of `σ₁ᵏ` (baseline).
    Pcaee1,
    /// BAEE of `σ₂ᵏ`.
    D02,
    /// Expansion truncation using `W`.
    D21,
    /// Shrinkage truncation using `W₁`.
    D22,
    /// Double-shrinkage combination of `d21` and `d22`.
    DoubleShrink,
    /// Brewster–Zidek-type smooth boundary estimator of `σ₂ᵏ`.
    Bz2,
    /// Pitman-closeness truncation of the BAEE of `σ₂ᵏ`.
    Pitman2,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 15] = [
        EstimatorId::D01,
        EstimatorId::D11,
        EstimatorId::D12,
        EstimatorId::D13,
        EstimatorId::D14,
        EstimatorId::Bz1,
        EstimatorId::Pitman1,
        EstimatorId::Pitman1Pcaee,
        EstimatorId::Pcaee1,
        EstimatorId::D02,
        EstimatorId::D21,
        EstimatorId::D22,
        EstimatorId::DoubleShrink,
        EstimatorId::Bz2,
        EstimatorId::Pitman2,
    ];

    /// The estimators with a risk-dominance claim over their BAEE.
    pub const IMPROVED: [EstimatorId; 9] = [
        EstimatorId::D11,
        EstimatorId::D12,
        EstimatorId::D13,
        EstimatorId::D14,
        EstimatorId::Bz1,
        EstimatorId::D21,
        EstimatorId::D22,
        EstimatorId::DoubleShrink,
        EstimatorId::Bz2,
    ];

    pub fn target(&self) -> Target {
        use EstimatorId::*;
        match self {
            D01 | D11 | D12 | D13 | D14 | Bz1 | Pitman1 | Pitman1Pcaee | Pcaee1 => Target::Sigma1,
            D02 | D21 | D22 | DoubleShrink | Bz2 | Pitman2 => Target::Sigma2,
        }
    }

    /// The BAEE this estimator's relative risk improvement is measured
    /// against.
    pub fn baseline(&self) -> EstimatorId {
        match self.target() {
            Target::Sigma1 => EstimatorId::D01,
            Target::Sigma2 => EstimatorId::D02,
        }
    }

    pub fn as_str(&self) -> &'static str {
        use EstimatorId::*;
        match self {
            D01 => "d01",
            D11 => "d11",
            D12 => "d12",
            D13 => "d13",
            D14 => "d14",
            Bz1 => "bz1",
            Pitman1 => "pitman1",
            Pitman1Pcaee => "pitman1-pcaee",
            Pcaee1 => "pcaee1",
            D02 => "d02",
            D21 => "d21",
            D22 => "d22",
            DoubleShrink => "dd",
            Bz2 => "bz2",
            Pitman2 => "pitman2",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        EstimatorId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str() == s.trim())
            .ok_or_else(|| Error::Validation(format!("unknown estimator id {s:?}")))
    }
}

impl Serialize for EstimatorId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// One computed estimate: `value = multiplier · Sᵢᵏ` exactly, with
/// `truncation_active` set iff a min/max clamp changed the unrestricted
/// multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: crate::Real + Serialize"))]
pub struct EstimateReport<T> {
    pub estimator: EstimatorId,
    pub multiplier: T,
    pub value: T,
    pub truncation_active: bool,
    pub loss: LossSpec<T>,
    pub k: T,
}
