//! Belief and belief-update measures and their combination functions.

mod evoking;
mod measure;
mod ops;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::ProbError;

pub use evoking::{evoking_strength, internist_score, EvokingThresholds};
pub use measure::{
    measure_by_name, CertaintyFactorMeasure, EvokingMeasure, LikelihoodRatioMeasure,
    PosteriorMeasure, UpdateMeasure, WeightMeasure,
};
pub use ops::{
    certainty_factor, certainty_factor_conditional, cf_from_probabilities, combine_lambdas,
    combine_weights, mycin_combine, posterior_from_weight, weight_of_evidence,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalcError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("{kind} value {value} is outside its legal range")]
    OutOfRange { kind: CalculusKind, value: f64 },
    #[error("cannot combine certainty factors +1 and -1")]
    ContradictoryCertainty,
    #[error("prior {0} must lie strictly between 0 and 1")]
    InvalidPrior(f64),
    #[error("expected a {expected} value, found {found}")]
    KindMismatch {
        expected: CalculusKind,
        found: CalculusKind,
    },
    #[error("invalid evoking thresholds: {0}")]
    InvalidThresholds(String),
    #[error("invalid log base: {0}")]
    InvalidLogBase(String),
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalculusKind {
    Lambda,
    Weight,
    Cf,
    Posterior,
    Evoking,
}

impl CalculusKind {
    pub const ALL: [CalculusKind; 5] = [
        CalculusKind::Lambda,
        CalculusKind::Weight,
        CalculusKind::Cf,
        CalculusKind::Posterior,
        CalculusKind::Evoking,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CalculusKind::Lambda => "lambda",
            CalculusKind::Weight => "weight",
            CalculusKind::Cf => "cf",
            CalculusKind::Posterior => "posterior",
            CalculusKind::Evoking => "evoking",
        }
    }
}

impl fmt::Display for CalculusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CalculusKind {
    type Err = CalcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CalculusKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| CalcError::UnknownMeasure(s.to_string()))
    }
}

/// A value of one calculus, range-checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawValue", into = "RawValue")]
pub enum CalculusValue {
    /// Likelihood ratio, in `(0, inf)`.
    Lambda(f64),
    /// Log likelihood ratio, any finite real.
    Weight(f64),
    /// Certainty factor, in `[-1, 1]`.
    Cf(f64),
    /// Posterior probability, in `[0, 1]`.
    Posterior(f64),
    /// Evoking strength, in `0..=5`.
    Evoking(u8),
}

#[derive(Serialize, Deserialize)]
struct RawValue {
    kind: CalculusKind,
    value: f64,
}

impl TryFrom<RawValue> for CalculusValue {
    type Error = CalcError;

    fn try_from(raw: RawValue) -> Result<Self, Self::Error> {
        CalculusValue::new(raw.kind, raw.value)
    }
}

impl From<CalculusValue> for RawValue {
    fn from(v: CalculusValue) -> Self {
        RawValue {
            kind: v.kind(),
            value: v.value(),
        }
    }
}

impl CalculusValue {
    pub fn new(kind: CalculusKind, value: f64) -> Result<Self, CalcError> {
        let out_of_range = || CalcError::OutOfRange { kind, value };
        let v = match kind {
            CalculusKind::Lambda if value.is_finite() && value > 0.0 => CalculusValue::Lambda(value),
            CalculusKind::Weight if value.is_finite() => CalculusValue::Weight(value),
            CalculusKind::Cf if (-1.0..=1.0).contains(&value) => CalculusValue::Cf(value),
            CalculusKind::Posterior if (0.0..=1.0).contains(&value) => {
                CalculusValue::Posterior(value)
            }
            CalculusKind::Evoking if (0.0..=5.0).contains(&value) && value.fract() == 0.0 => {
                CalculusValue::Evoking(value as u8)
            }
            _ => return Err(out_of_range()),
        };
        Ok(v)
    }

    pub fn kind(self) -> CalculusKind {
        match self {
            CalculusValue::Lambda(_) => CalculusKind::Lambda,
            CalculusValue::Weight(_) => CalculusKind::Weight,
            CalculusValue::Cf(_) => CalculusKind::Cf,
            CalculusValue::Posterior(_) => CalculusKind::Posterior,
            CalculusValue::Evoking(_) => CalculusKind::Evoking,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            CalculusValue::Lambda(v)
            | CalculusValue::Weight(v)
            | CalculusValue::Cf(v)
            | CalculusValue::Posterior(v) => v,
            CalculusValue::Evoking(s) => f64::from(s),
        }
    }

    /// Re-checks the range invariant.
    pub fn validate(self) -> Result<Self, CalcError> {
        Self::new(self.kind(), self.value())
    }
}

/// Logarithm base for weights of evidence. Natural log by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBase(f64);

impl LogBase {
    pub const NATURAL: LogBase = LogBase(std::f64::consts::E);
    pub const TEN: LogBase = LogBase(10.0);

    pub fn new(base: f64) -> Result<Self, CalcError> {
        if base.is_finite() && base > 0.0 && base != 1.0 {
            Ok(LogBase(base))
        } else {
            Err(CalcError::InvalidLogBase(base.to_string()))
        }
    }

    pub fn base(self) -> f64 {
        self.0
    }

    pub fn is_natural(self) -> bool {
        self.0 == std::f64::consts::E
    }

    pub fn log(self, x: f64) -> f64 {
        if self.is_natural() {
            x.ln()
        } else if self.0 == 10.0 {
            x.log10()
        } else {
            x.ln() / self.0.ln()
        }
    }

    /// Natural log of the base, the factor converting weights to nats.
    pub fn ln_base(self) -> f64 {
        if self.is_natural() {
            1.0
        } else {
            self.0.ln()
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::NATURAL
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_natural() {
            f.write_str("e")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for LogBase {
    type Err = CalcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "e" | "ln" | "natural" => Ok(LogBase::NATURAL),
            other => other
                .parse::<f64>()
                .map_err(|_| CalcError::InvalidLogBase(other.to_string()))
                .and_then(LogBase::new),
        }
    }
}

impl Serialize for LogBase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LogBase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
