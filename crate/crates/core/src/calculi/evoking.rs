use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::prob::{EvidenceSet, JointDistribution, Proposition};

use super::{CalcError, CalculusKind};

/// Monotone bucketing of a posterior into an evoking strength.
///
/// Strength `k` for `1 <= k <= 4` is reached once `p > cuts[k-1]`;
/// strength 5 is reserved for `p == 1`. With the default cuts
/// `[0, .1, .35, .65]` this gives `0` at `p = 0`, `(0, .1] -> 1`,
/// `(.1, .35] -> 2`, `(.35, .65] -> 3` and `(.65, 1) -> 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct EvokingThresholds {
    cuts: [f64; 4],
}

impl Default for EvokingThresholds {
    fn default() -> Self {
        Self {
            cuts: [0.0, 0.1, 0.35, 0.65],
        }
    }
}

impl EvokingThresholds {
    pub fn new(cuts: [f64; 4]) -> Result<Self, CalcError> {
        if cuts.iter().any(|c| !(0.0..1.0).contains(c)) {
            return Err(CalcError::InvalidThresholds(format!(
                "cuts must lie in [0, 1): {cuts:?}"
            )));
        }
        if cuts.windows(2).any(|w| w[0] > w[1]) {
            return Err(CalcError::InvalidThresholds(format!(
                "cuts must be nondecreasing: {cuts:?}"
            )));
        }
        Ok(Self { cuts })
    }

    pub fn cuts(&self) -> [f64; 4] {
        self.cuts
    }

    pub fn strength(&self, posterior: f64) -> Result<u8, CalcError> {
        if !(0.0..=1.0).contains(&posterior) {
            return Err(CalcError::OutOfRange {
                kind: CalculusKind::Posterior,
                value: posterior,
            });
        }
        if posterior >= 1.0 {
            return Ok(5);
        }
        Ok(self.cuts.iter().filter(|&&c| posterior > c).count() as u8)
    }
}

impl TryFrom<[f64; 4]> for EvokingThresholds {
    type Error = CalcError;

    fn try_from(cuts: [f64; 4]) -> Result<Self, Self::Error> {
        Self::new(cuts)
    }
}

impl From<EvokingThresholds> for [f64; 4] {
    fn from(t: EvokingThresholds) -> Self {
        t.cuts
    }
}

impl fmt::Display for EvokingThresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cuts.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for EvokingThresholds {
    type Err = CalcError;

    /// Four comma-separated cut points, e.g. `0,0.1,0.35,0.65`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let values = values.map_err(|e| CalcError::InvalidThresholds(e.to_string()))?;
        let cuts: [f64; 4] = values.try_into().map_err(|v: Vec<f64>| {
            CalcError::InvalidThresholds(format!("expected 4 cut points, got {}", v.len()))
        })?;
        Self::new(cuts)
    }
}

/// Evoking strength of `evidence` for `hypothesis`: the bucketed posterior.
pub fn evoking_strength(
    dist: &JointDistribution,
    hypothesis: &Proposition,
    evidence: &EvidenceSet,
    thresholds: &EvokingThresholds,
) -> Result<u8, CalcError> {
    let p = dist.posterior(hypothesis, evidence)?;
    thresholds.strength(p)
}

/// Disease score by summation of evoking strengths.
pub fn internist_score(strengths: &[u8]) -> Result<u32, CalcError> {
    strengths.iter().try_fold(0u32, |acc, &s| {
        if s > 5 {
            Err(CalcError::OutOfRange {
                kind: CalculusKind::Evoking,
                value: f64::from(s),
            })
        } else {
            Ok(acc + u32::from(s))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_buckets() {
        let t = EvokingThresholds::default();
        let cases = [
            (0.0, 0),
            (1e-9, 1),
            (0.1, 1),
            (0.2, 2),
            (0.35, 2),
            (0.5, 3),
            (0.55, 3),
            (0.65, 3),
            (0.8, 4),
            (0.95, 4),
            (0.99, 4),
            (1.0, 5),
        ];
        for (p, s) in cases {
            assert_eq!(t.strength(p).unwrap(), s, "p = {p}");
        }
        assert!(t.strength(1.5).is_err());
    }

    #[test]
    fn parse_thresholds() {
        let t: EvokingThresholds = "0, 0.1, 0.35, 0.65".parse().unwrap();
        assert_eq!(t, EvokingThresholds::default());
        assert!("0.5,0.4,0.6,0.7".parse::<EvokingThresholds>().is_err());
        assert!("0.1,0.2".parse::<EvokingThresholds>().is_err());
        assert!("0.1,0.2,0.3,1.0".parse::<EvokingThresholds>().is_err());
    }

    #[test]
    fn scores_sum() {
        assert_eq!(internist_score(&[]).unwrap(), 0);
        assert_eq!(internist_score(&[3, 5]).unwrap(), 8);
        assert_eq!(internist_score(&[1, 1, 1, 1, 1]).unwrap(), internist_score(&[5]).unwrap());
        assert!(internist_score(&[6]).is_err());
    }
}
