use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::calculi::UpdateMeasure;
use crate::prob::{EvidenceSet, ModelSpec};

use super::{
    check_tolerance, guard_masses, update_triples, AuditError, AuditReport, Axiom, Scenario,
    ScenarioFamily, SkippedScenario, Verdict, Witness, WitnessRole,
};

/// Component and combined updates of one `(E1, E2, e)` triple, in the
/// measure's comparison coordinate.
#[derive(Debug, Clone)]
pub(crate) struct UpdatePoint {
    pub first: EvidenceSet,
    pub second: EvidenceSet,
    pub prior: EvidenceSet,
    /// `U(H, E1, e)`
    pub u_first: f64,
    /// `U(H, E2, E1 e)`
    pub u_second: f64,
    /// `U(H, E1 E2, e)`
    pub u_combined: f64,
    /// `phi(U(H,E1,e), U(H,E2,E1 e))` when the measure declares one.
    pub declared: Option<f64>,
}

pub(crate) fn evaluate_point(
    measure: &dyn UpdateMeasure,
    scenario: &Scenario,
    first: &EvidenceSet,
    second: &EvidenceSet,
    prior: &EvidenceSet,
) -> Result<UpdatePoint, String> {
    let dist = &scenario.dist;
    let h = dist.hypothesis();
    let first_prior = first.union(prior).map_err(|e| e.to_string())?;
    let both = first.union(second).map_err(|e| e.to_string())?;
    let everything = both.union(prior).map_err(|e| e.to_string())?;
    guard_masses(dist, &h, &[prior, &first_prior, &everything])?;
    let eval = |e: &EvidenceSet, p: &EvidenceSet| {
        measure
            .evaluate(dist, &h, e, p)
            .map_err(|err| format!("{e}|{p}: {err}"))
    };
    let a = eval(first, prior)?;
    let b = eval(second, &first_prior)?;
    let c = eval(&both, prior)?;
    let declared = match measure.combine(a, b) {
        Some(Ok(v)) => Some(measure.coordinate(v)),
        _ => None,
    };
    let point = UpdatePoint {
        first: first.clone(),
        second: second.clone(),
        prior: prior.clone(),
        u_first: measure.coordinate(a),
        u_second: measure.coordinate(b),
        u_combined: measure.coordinate(c),
        declared,
    };
    if [point.u_first, point.u_second, point.u_combined]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Err(format!("non-finite update coordinate for {first}, {second} | {prior}"));
    }
    Ok(point)
}

fn scenario_points(measure: &dyn UpdateMeasure, scenario: &Scenario) -> Result<Vec<UpdatePoint>, String> {
    update_triples(&scenario.dist)
        .iter()
        .map(|(a, b, p)| evaluate_point(measure, scenario, a, b, p))
        .collect()
}

pub(crate) fn point_witness(scenario: &Scenario, point: &UpdatePoint, magnitude: f64) -> Witness {
    let mut observed = BTreeMap::from([
        ("u_first".to_string(), point.u_first),
        ("u_second_given_first".to_string(), point.u_second),
        ("u_combined".to_string(), point.u_combined),
    ]);
    if let Some(d) = point.declared {
        observed.insert("declared_combination".to_string(), d);
    }
    Witness {
        role: WitnessRole::Collision,
        scenario_id: scenario.id,
        scenario: scenario.label.clone(),
        model: ModelSpec::from(&scenario.dist),
        hypothesis: scenario.dist.hypothesis(),
        evidence: point.first.clone(),
        second_evidence: Some(point.second.clone()),
        prior_evidence: point.prior.clone(),
        observed,
        magnitude,
        partner: None,
    }
}

/// Refutation search for the basic update property: looks for two triples
/// whose component updates agree within `match_tol` in both coordinates
/// while their combined updates differ by more than `tol`. Such a pair
/// shows that no combination function of the two components exists.
///
/// Failing to find one does not prove that a function exists; the report
/// says "not refuted" in that case.
pub fn check_update_property(
    measure: &dyn UpdateMeasure,
    family: &ScenarioFamily,
    tol: f64,
    match_tol: f64,
) -> Result<AuditReport, AuditError> {
    check_tolerance("tol", tol)?;
    check_tolerance("match_tol", match_tol)?;
    if match_tol <= 0.0 {
        return Err(AuditError::InvalidTolerance("match_tol must be positive".into()));
    }
    let scenarios = family.scenarios()?;
    for s in &scenarios {
        if s.dist.arity() < 2 {
            return Err(AuditError::ArityTooSmall {
                scenario: s.id,
                required: 2,
                found: s.dist.arity(),
            });
        }
    }
    let outcomes: Vec<_> = scenarios
        .par_iter()
        .map(|s| scenario_points(measure, s))
        .collect();

    let mut report = AuditReport::new(measure.name(), Axiom::UpdateProperty, family, tol);
    report.match_tolerance = Some(match_tol);
    report.scenarios_total = scenarios.len();

    // (scenario index, point index) in deterministic order.
    let mut points: Vec<(usize, usize)> = Vec::new();
    let mut declared_error: f64 = 0.0;
    for (idx, (scenario, outcome)) in scenarios.iter().zip(&outcomes).enumerate() {
        match outcome {
            Err(reason) => report.skipped.push(SkippedScenario {
                scenario_id: scenario.id,
                reason: reason.clone(),
            }),
            Ok(pts) => {
                report.scenarios_tested += 1;
                for (k, p) in pts.iter().enumerate() {
                    if let Some(d) = p.declared {
                        declared_error = declared_error.max((d - p.u_combined).abs());
                    }
                    points.push((idx, k));
                }
            }
        }
    }
    report.scenarios_skipped = report.skipped.len();
    report.comparisons = points.len();
    let point = |&(s, k): &(usize, usize)| &outcomes[s].as_ref().expect("tested")[k];

    let cell = |v: f64| (v / match_tol).floor() as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, key) in points.iter().enumerate() {
        let p = point(key);
        grid.entry((cell(p.u_first), cell(p.u_second))).or_default().push(i);
    }

    let mut matched_pairs = 0usize;
    let mut collisions = 0usize;
    let mut worst: Option<(f64, usize, usize)> = None;
    for (i, key) in points.iter().enumerate() {
        let p = point(key);
        let (cx, cy) = (cell(p.u_first), cell(p.u_second));
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket {
                    if j <= i {
                        continue;
                    }
                    let q = point(&points[j]);
                    if (p.u_first - q.u_first).abs() > match_tol
                        || (p.u_second - q.u_second).abs() > match_tol
                    {
                        continue;
                    }
                    matched_pairs += 1;
                    let gap = (p.u_combined - q.u_combined).abs();
                    report.max_deviation = report.max_deviation.max(gap);
                    if gap > tol {
                        collisions += 1;
                        let better = match worst {
                            None => true,
                            Some((g, wi, wj)) => gap > g || (gap == g && (i, j) < (wi, wj)),
                        };
                        if better {
                            worst = Some((gap, i, j));
                        }
                    }
                }
            }
        }
    }
    report.counts.insert("points".into(), points.len());
    report.counts.insert("matched_pairs".into(), matched_pairs);
    report.counts.insert("collisions".into(), collisions);
    if declared_error.is_finite() && outcomes.iter().flatten().flatten().any(|p| p.declared.is_some()) {
        report.push_quantity(
            "declared_combinator_max_error",
            declared_error,
            "max |phi(U(H,E1,e), U(H,E2,E1 e)) - U(H,E1 E2,e)| for the declared combinator",
        );
    }
    if measure.kind() == crate::calculi::CalculusKind::Lambda {
        report
            .notes
            .push("likelihood ratios are compared on the log scale".into());
    }

    match worst {
        Some((gap, i, j)) => {
            let (si, _) = points[i];
            let (sj, _) = points[j];
            let p = point(&points[i]);
            let q = point(&points[j]);
            let mut w = point_witness(&scenarios[si], p, gap);
            let mut partner = point_witness(&scenarios[sj], q, gap);
            w.observed
                .insert("first_component_gap".into(), (p.u_first - q.u_first).abs());
            w.observed
                .insert("second_component_gap".into(), (p.u_second - q.u_second).abs());
            partner.observed = partner
                .observed
                .into_iter()
                .filter(|(k, _)| !k.ends_with("_gap"))
                .collect();
            w.partner = Some(Box::new(partner));
            report.witnesses.push(w);
            report.verdict = Verdict::Violated;
            report.conclusion = format!(
                "refuted: {collisions} collision pairs have component updates equal within {match_tol:e} \
                 but combined updates differing by more than {tol:e} (worst {gap:.6}); \
                 no combination function exists"
            );
        }
        None => {
            report.verdict = Verdict::Holds;
            report.conclusion = format!(
                "not refuted: none of {matched_pairs} matched pairs differ in the combined update by \
                 more than {tol:e}; existence of a combination function can be refuted by search but not proved"
            );
        }
    }
    Ok(report)
}
