use crate::calculi::{PosteriorMeasure, UpdateMeasure};
use crate::prob::EvidenceSet;

use super::update_property::{evaluate_point, UpdatePoint};
use super::{AuditError, Scenario, Witness, WitnessRole};

/// Recomputed gaps of a collision witness and its partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionReplay {
    pub first_component_gap: f64,
    pub second_component_gap: f64,
    pub combined_gap: f64,
}

fn standalone(witness: &Witness) -> Result<Scenario, AuditError> {
    Ok(Scenario {
        id: witness.scenario_id,
        label: witness.scenario.clone(),
        dist: witness.model.to_joint()?,
    })
}

fn replay_point(measure: &dyn UpdateMeasure, witness: &Witness) -> Result<UpdatePoint, AuditError> {
    let scenario = standalone(witness)?;
    let second = witness
        .second_evidence
        .as_ref()
        .ok_or_else(|| AuditError::NotReplayable("collision witness lacks E2".into()))?;
    evaluate_point(
        measure,
        &scenario,
        &witness.evidence,
        second,
        &witness.prior_evidence,
    )
    .map_err(AuditError::NotReplayable)
}

/// Re-evaluates a collision witness from its embedded tables alone.
pub fn replay_collision(
    measure: &dyn UpdateMeasure,
    witness: &Witness,
) -> Result<CollisionReplay, AuditError> {
    let partner = witness
        .partner
        .as_deref()
        .ok_or_else(|| AuditError::NotReplayable("collision witness lacks a partner".into()))?;
    let p = replay_point(measure, witness)?;
    let q = replay_point(measure, partner)?;
    Ok(CollisionReplay {
        first_component_gap: (p.u_first - q.u_first).abs(),
        second_component_gap: (p.u_second - q.u_second).abs(),
        combined_gap: (p.u_combined - q.u_combined).abs(),
    })
}

/// Re-evaluates any witness standalone and returns its magnitude.
///
/// Violations replay `|U(H,E,e) - U(H,E,∅)|` under `measure`; masked
/// witnesses replay the hidden posterior gap; collisions replay the
/// combined-update gap.
pub fn replay_witness(measure: &dyn UpdateMeasure, witness: &Witness) -> Result<f64, AuditError> {
    match witness.role {
        WitnessRole::Collision => Ok(replay_collision(measure, witness)?.combined_gap),
        WitnessRole::Violation | WitnessRole::Masked => {
            let scenario = standalone(witness)?;
            let dist = &scenario.dist;
            let posterior = PosteriorMeasure;
            let m: &dyn UpdateMeasure = if witness.role == WitnessRole::Masked {
                &posterior
            } else {
                measure
            };
            let with = m.evaluate(dist, &witness.hypothesis, &witness.evidence, &witness.prior_evidence)?;
            let without = m.evaluate(dist, &witness.hypothesis, &witness.evidence, &EvidenceSet::empty())?;
            Ok((with.value() - without.value()).abs())
        }
    }
}
