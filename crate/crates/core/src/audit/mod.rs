//! Mechanical checks of update measures against the basic update property
//! and modularity, plus the canned reproductions built on them.
//!
//! Every posterior consumed here comes from raw table enumeration in
//! [`crate::prob`]. Scenarios that would condition on mass below
//! [`MIN_CONDITIONING_MASS`] are skipped, counted and listed, and never
//! contribute to a verdict.

mod family;
mod modularity;
mod reproductions;
mod replay;
mod report;
mod update_property;

use thiserror::Error;

use crate::calculi::CalcError;
use crate::prob::{EvidenceSet, JointDistribution, ProbError, Proposition};

pub use family::{Scenario, ScenarioFamily, GRID_PRIORS, GRID_RATIOS};
pub use modularity::{audit_evoking_strengths, check_modularity};
pub use replay::{replay_collision, replay_witness, CollisionReplay};
pub use report::{AuditReport, Axiom, Quantity, SkippedScenario, Verdict, Witness, WitnessRole};
pub use reproductions::{
    check_cf_limit_case, check_marginal_independence_trap, reproduce_mycin_counterexample,
};
pub use update_property::check_update_property;

/// Conditioning events lighter than this are treated as zero mass.
pub const MIN_CONDITIONING_MASS: f64 = 1e-12;
/// Reports keep at most this many witnesses, worst first.
pub const MAX_WITNESSES: usize = 16;
/// Default tolerance for modularity comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Default component-match tolerance for the collision search.
pub const DEFAULT_MATCH_TOLERANCE: f64 = 1e-4;
/// Default combined-update separation for the collision search.
pub const DEFAULT_COLLISION_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("scenario family is empty")]
    EmptyFamily,
    #[error("scenario {scenario} has {found} evidence variables; at least {required} are needed")]
    ArityTooSmall {
        scenario: usize,
        required: usize,
        found: usize,
    },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("witness is not replayable: {0}")]
    NotReplayable(String),
}

pub(crate) fn check_tolerance(name: &str, value: f64) -> Result<(), AuditError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(AuditError::InvalidTolerance(format!("{name} = {value}")))
    }
}

/// Fails with a reason when any conditioning event built from `sets`
/// (alone, with `h` and with `~h`) is lighter than
/// [`MIN_CONDITIONING_MASS`].
pub(crate) fn guard_masses(
    dist: &JointDistribution,
    hypothesis: &Proposition,
    sets: &[&EvidenceSet],
) -> Result<(), String> {
    let h = dist.hypothesis_event(hypothesis).map_err(|e| e.to_string())?;
    let not_h = dist
        .hypothesis_event(&hypothesis.negate())
        .map_err(|e| e.to_string())?;
    for set in sets {
        let event = dist.evidence_event(set).map_err(|e| e.to_string())?;
        for (label, ev) in [("", event), ("H ", h.and(event)), ("~H ", not_h.and(event))] {
            let m = dist.mass(ev);
            if m < MIN_CONDITIONING_MASS {
                return Err(format!("conditioning event {label}{set} has mass {m:e}"));
            }
        }
    }
    Ok(())
}

/// `(E, e)` pairs with both sides nonempty and on disjoint variables.
pub(crate) fn modularity_pairs(dist: &JointDistribution) -> Vec<(EvidenceSet, EvidenceSet)> {
    let sets = dist.evidence_conjunctions(false);
    let mut out = Vec::new();
    for e_new in &sets {
        for e_prior in &sets {
            if !e_new.shares_variable_with(e_prior) {
                out.push((e_new.clone(), e_prior.clone()));
            }
        }
    }
    out
}

/// `(E1, E2, e)` triples: `E1`, `E2` nonempty, all three on disjoint
/// variables, `e` possibly empty.
pub(crate) fn update_triples(
    dist: &JointDistribution,
) -> Vec<(EvidenceSet, EvidenceSet, EvidenceSet)> {
    let nonempty = dist.evidence_conjunctions(false);
    let all = dist.evidence_conjunctions(true);
    let mut out = Vec::new();
    for first in &nonempty {
        for second in &nonempty {
            if first.shares_variable_with(second) {
                continue;
            }
            for prior in &all {
                if !prior.shares_variable_with(first) && !prior.shares_variable_with(second) {
                    out.push((first.clone(), second.clone(), prior.clone()));
                }
            }
        }
    }
    out
}

pub(crate) fn sort_witnesses(witnesses: &mut Vec<Witness>) {
    witnesses.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    witnesses.truncate(MAX_WITNESSES);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::NaiveBayesModel;

    #[test]
    fn pair_and_triple_counts_for_two_findings() {
        let d = JointDistribution::from_naive_bayes(&NaiveBayesModel::from_ratios(0.3, &[2.0, 3.0]).unwrap())
            .unwrap();
        assert_eq!(modularity_pairs(&d).len(), 8);
        assert_eq!(update_triples(&d).len(), 8);
    }

    #[test]
    fn guard_rejects_light_events() {
        let schema = crate::prob::Schema::numbered(1);
        let d = JointDistribution::from_table(schema, &[0.5, 0.0, 0.5, 0.0]).unwrap();
        let h = Proposition::positive("H");
        let absent = EvidenceSet::single(Proposition::negated("E1"));
        assert!(guard_masses(&d, &h, &[&EvidenceSet::empty()]).is_ok());
        assert!(guard_masses(&d, &h, &[&absent]).is_err());
    }
}
