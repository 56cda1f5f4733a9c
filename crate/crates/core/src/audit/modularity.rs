use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::calculi::{CalculusValue, EvokingThresholds, UpdateMeasure};
use crate::prob::{EvidenceSet, ModelSpec};

use super::{
    check_tolerance, guard_masses, modularity_pairs, sort_witnesses, AuditError, AuditReport,
    Axiom, Scenario, ScenarioFamily, SkippedScenario, Verdict, Witness, WitnessRole,
    MAX_WITNESSES,
};

struct PairEval {
    evidence: EvidenceSet,
    prior: EvidenceSet,
    with_prior: CalculusValue,
    without_prior: CalculusValue,
}

fn evaluate_pairs(measure: &dyn UpdateMeasure, scenario: &Scenario) -> Result<Vec<PairEval>, String> {
    let dist = &scenario.dist;
    let h = dist.hypothesis();
    let none = EvidenceSet::empty();
    let mut out = Vec::new();
    for (evidence, prior) in modularity_pairs(dist) {
        let joint = evidence.union(&prior).map_err(|e| e.to_string())?;
        guard_masses(dist, &h, &[&none, &prior, &evidence, &joint])?;
        let with_prior = measure
            .evaluate(dist, &h, &evidence, &prior)
            .map_err(|e| format!("{}|{}: {e}", evidence, prior))?;
        let without_prior = measure
            .evaluate(dist, &h, &evidence, &none)
            .map_err(|e| format!("{}|∅: {e}", evidence))?;
        out.push(PairEval {
            evidence,
            prior,
            with_prior,
            without_prior,
        });
    }
    Ok(out)
}

pub(crate) fn modularity_witness(
    role: WitnessRole,
    scenario: &Scenario,
    evidence: &EvidenceSet,
    prior: &EvidenceSet,
    observed: BTreeMap<String, f64>,
    magnitude: f64,
) -> Witness {
    Witness {
        role,
        scenario_id: scenario.id,
        scenario: scenario.label.clone(),
        model: ModelSpec::from(&scenario.dist),
        hypothesis: scenario.dist.hypothesis(),
        evidence: evidence.clone(),
        second_evidence: None,
        prior_evidence: prior.clone(),
        observed,
        magnitude,
        partner: None,
    }
}

/// Compares `U(H,E,e)` with `U(H,E,∅)` for every scenario and every pair
/// of nonempty, disjoint `E` and `e`. Holds iff the largest absolute
/// difference is within `tol`.
pub fn check_modularity(
    measure: &dyn UpdateMeasure,
    family: &ScenarioFamily,
    tol: f64,
) -> Result<AuditReport, AuditError> {
    check_tolerance("tol", tol)?;
    let scenarios = family.scenarios()?;
    let outcomes: Vec<_> = scenarios
        .par_iter()
        .map(|s| evaluate_pairs(measure, s))
        .collect();

    let mut report = AuditReport::new(measure.name(), Axiom::Modularity, family, tol);
    report.scenarios_total = scenarios.len();
    let mut violations: Vec<(f64, usize, usize)> = Vec::new();
    for (scenario, outcome) in scenarios.iter().zip(&outcomes) {
        match outcome {
            Err(reason) => report.skipped.push(SkippedScenario {
                scenario_id: scenario.id,
                reason: reason.clone(),
            }),
            Ok(pairs) => {
                report.scenarios_tested += 1;
                for (k, pair) in pairs.iter().enumerate() {
                    report.comparisons += 1;
                    let deviation = (pair.with_prior.value() - pair.without_prior.value()).abs();
                    report.max_deviation = report.max_deviation.max(deviation);
                    if deviation > tol {
                        violations.push((deviation, scenario.id, k));
                    }
                }
            }
        }
    }
    report.scenarios_skipped = report.skipped.len();
    report
        .counts
        .insert("violating_comparisons".into(), violations.len());
    let violating_scenarios = {
        let mut ids: Vec<usize> = violations.iter().map(|v| v.1).collect();
        ids.dedup();
        ids.len()
    };
    report
        .counts
        .insert("violating_scenarios".into(), violating_scenarios);

    violations.sort_by(|a, b| b.0.total_cmp(&a.0));
    for &(deviation, id, k) in violations.iter().take(MAX_WITNESSES) {
        let pair = &outcomes[id].as_ref().expect("tested scenario")[k];
        let observed = BTreeMap::from([
            ("update_given_prior".to_string(), pair.with_prior.value()),
            ("update_without_prior".to_string(), pair.without_prior.value()),
        ]);
        report.witnesses.push(modularity_witness(
            WitnessRole::Violation,
            &scenarios[id],
            &pair.evidence,
            &pair.prior,
            observed,
            deviation,
        ));
    }

    if violations.is_empty() {
        report.verdict = Verdict::Holds;
        report.conclusion = format!(
            "{} is independent of prior evidence on every tested scenario (max deviation {:.3e} <= {:e})",
            report.measure, report.max_deviation, tol
        );
    } else {
        report.verdict = Verdict::Violated;
        report.conclusion = format!(
            "{} depends on prior evidence: {} of {} comparisons exceed {:e} (max {:.6})",
            report.measure,
            violations.len(),
            report.comparisons,
            tol,
            report.max_deviation
        );
    }
    Ok(report)
}

/// Modularity audit of evoking strengths. Every pair whose posteriors
/// differ by more than `tol` is a posterior-level violation; it is
/// reported as a bucket violation when the strengths differ and as masked
/// when bucketing hides it.
pub fn audit_evoking_strengths(
    family: &ScenarioFamily,
    thresholds: EvokingThresholds,
    tol: f64,
) -> Result<AuditReport, AuditError> {
    check_tolerance("tol", tol)?;
    let scenarios = family.scenarios()?;
    let posterior = crate::calculi::PosteriorMeasure;
    let outcomes: Vec<_> = scenarios
        .par_iter()
        .map(|s| evaluate_pairs(&posterior, s))
        .collect();

    let mut report = AuditReport::new("evoking", Axiom::EvokingModularity, family, tol);
    report.scenarios_total = scenarios.len();
    report
        .notes
        .push(format!("evoking thresholds (cuts for strengths 1-4): {thresholds}; strength 5 iff p(H|E) = 1"));
    let mut violations = Vec::new();
    let mut masked = Vec::new();
    let mut posterior_violations = 0usize;
    for (scenario, outcome) in scenarios.iter().zip(&outcomes) {
        let pairs = match outcome {
            Err(reason) => {
                report.skipped.push(SkippedScenario {
                    scenario_id: scenario.id,
                    reason: reason.clone(),
                });
                continue;
            }
            Ok(pairs) => pairs,
        };
        report.scenarios_tested += 1;
        for pair in pairs {
            report.comparisons += 1;
            let p_with = pair.with_prior.value();
            let p_without = pair.without_prior.value();
            let s_with = thresholds.strength(p_with)?;
            let s_without = thresholds.strength(p_without)?;
            let bucket_gap = f64::from(s_with.abs_diff(s_without));
            report.max_deviation = report.max_deviation.max(bucket_gap);
            let posterior_gap = (p_with - p_without).abs();
            if posterior_gap <= tol {
                continue;
            }
            posterior_violations += 1;
            let observed = BTreeMap::from([
                ("posterior_given_prior".to_string(), p_with),
                ("posterior_without_prior".to_string(), p_without),
                ("strength_given_prior".to_string(), f64::from(s_with)),
                ("strength_without_prior".to_string(), f64::from(s_without)),
            ]);
            if s_with != s_without {
                violations.push(modularity_witness(
                    WitnessRole::Violation,
                    scenario,
                    &pair.evidence,
                    &pair.prior,
                    observed,
                    bucket_gap,
                ));
            } else {
                masked.push(modularity_witness(
                    WitnessRole::Masked,
                    scenario,
                    &pair.evidence,
                    &pair.prior,
                    observed,
                    posterior_gap,
                ));
            }
        }
    }
    report.scenarios_skipped = report.skipped.len();
    report
        .counts
        .insert("posterior_violations".into(), posterior_violations);
    report
        .counts
        .insert("bucket_violations".into(), violations.len());
    report.counts.insert("masked".into(), masked.len());
    report.verdict = if violations.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Violated
    };
    report.conclusion = if posterior_violations == 0 {
        "posteriors are independent of prior evidence on every tested scenario; \
         evoking strengths are modular only in this degenerate case"
            .to_string()
    } else {
        format!(
            "modularity assumption refuted: {posterior_violations} comparisons have posteriors that \
             depend on prior evidence"
        )
    };
    if posterior_violations > 0 {
        report.notes.push(format!(
            "these thresholds expose {} of the posterior violations as strength changes and mask {}",
            violations.len(),
            masked.len()
        ));
    }
    sort_witnesses(&mut violations);
    masked.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    masked.truncate(MAX_WITNESSES / 2);
    report.witnesses = violations;
    report.witnesses.extend(masked);
    Ok(report)
}
