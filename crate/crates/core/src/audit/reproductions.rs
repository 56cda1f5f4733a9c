use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::calculi::{
    cf_from_probabilities, certainty_factor_conditional, mycin_combine, CertaintyFactorMeasure,
};
use crate::prob::{EvidenceSet, JointDistribution, Proposition};

use super::family::counterexample_model;
use super::modularity::modularity_witness;
use super::{
    check_modularity, check_tolerance, guard_masses, modularity_pairs, sort_witnesses, AuditError,
    AuditReport, Axiom, Scenario, ScenarioFamily, SkippedScenario, Verdict, WitnessRole,
};

/// Single-literal likelihood ratios within this of 1 count as uninformative.
const UNINFORMATIVE_TOLERANCE: f64 = 1e-12;

struct TrapOutcome {
    informative: bool,
    posterior_deviation: f64,
    worst_pair: Option<(EvidenceSet, EvidenceSet, f64, f64)>,
    marginal_dependence: f64,
}

fn trap_outcome(scenario: &Scenario) -> Result<TrapOutcome, String> {
    let dist = &scenario.dist;
    let h = dist.hypothesis();
    let none = EvidenceSet::empty();
    let prior = dist.posterior(&h, &none).map_err(|e| e.to_string())?;

    let mut informative = false;
    for name in dist.schema().evidence() {
        for lit in [Proposition::positive(name.clone()), Proposition::negated(name.clone())] {
            let set = EvidenceSet::single(lit);
            guard_masses(dist, &h, &[&none, &set])?;
            let lambda = dist
                .likelihood_ratio(&h, &set, &none)
                .map_err(|e| e.to_string())?;
            if (lambda - 1.0).abs() > UNINFORMATIVE_TOLERANCE {
                informative = true;
            }
        }
    }

    let mut marginal_dependence: f64 = 0.0;
    for e in dist.evidence_conjunctions(false) {
        guard_masses(dist, &h, &[&e])?;
        let p = dist.posterior(&h, &e).map_err(|err| err.to_string())?;
        marginal_dependence = marginal_dependence.max((p - prior).abs());
    }

    let mut posterior_deviation: f64 = 0.0;
    let mut worst_pair = None;
    for (evidence, prior_evidence) in modularity_pairs(dist) {
        let joint = evidence.union(&prior_evidence).map_err(|e| e.to_string())?;
        guard_masses(dist, &h, &[&evidence, &joint])?;
        let with = dist.posterior(&h, &joint).map_err(|e| e.to_string())?;
        let without = dist.posterior(&h, &evidence).map_err(|e| e.to_string())?;
        let dev = (with - without).abs();
        if dev > posterior_deviation {
            posterior_deviation = dev;
            worst_pair = Some((evidence, prior_evidence, with, without));
        }
    }
    Ok(TrapOutcome {
        informative,
        posterior_deviation,
        worst_pair,
        marginal_dependence,
    })
}

/// Treats the posterior `p(H|E e)` as a candidate modular update and
/// checks, scenario by scenario, that it is modular only where the
/// evidence is marginally independent of the hypothesis.
///
/// The verdict concerns posterior modularity over the family; the counts
/// and conclusion carry the reductio.
pub fn check_marginal_independence_trap(
    family: &ScenarioFamily,
    tol: f64,
) -> Result<AuditReport, AuditError> {
    check_tolerance("tol", tol)?;
    let scenarios = family.scenarios()?;
    let outcomes: Vec<_> = scenarios.par_iter().map(trap_outcome).collect();

    let mut report = AuditReport::new("posterior", Axiom::MarginalIndependence, family, tol);
    report.scenarios_total = scenarios.len();
    let mut counts: BTreeMap<&str, usize> = [
        "informative_scenarios",
        "informative_violating",
        "uninformative_scenarios",
        "uninformative_satisfying",
        "modular_scenarios",
        "modular_marginally_independent",
        "modular_marginally_dependent",
    ]
    .into_iter()
    .map(|k| (k, 0))
    .collect();
    let mut witnesses = Vec::new();
    for (scenario, outcome) in scenarios.iter().zip(&outcomes) {
        let o = match outcome {
            Err(reason) => {
                report.skipped.push(SkippedScenario {
                    scenario_id: scenario.id,
                    reason: reason.clone(),
                });
                continue;
            }
            Ok(o) => o,
        };
        report.scenarios_tested += 1;
        report.comparisons += modularity_pairs(&scenario.dist).len();
        report.max_deviation = report.max_deviation.max(o.posterior_deviation);
        let modular = o.posterior_deviation <= tol;
        let independent = o.marginal_dependence <= tol;
        if o.informative {
            *counts.get_mut("informative_scenarios").unwrap() += 1;
            if !modular {
                *counts.get_mut("informative_violating").unwrap() += 1;
            }
        } else {
            *counts.get_mut("uninformative_scenarios").unwrap() += 1;
            if modular {
                *counts.get_mut("uninformative_satisfying").unwrap() += 1;
            }
        }
        if modular {
            *counts.get_mut("modular_scenarios").unwrap() += 1;
            let key = if independent {
                "modular_marginally_independent"
            } else {
                "modular_marginally_dependent"
            };
            *counts.get_mut(key).unwrap() += 1;
        } else if let Some((evidence, prior, with, without)) = &o.worst_pair {
            let observed = BTreeMap::from([
                ("posterior_given_prior".to_string(), *with),
                ("posterior_without_prior".to_string(), *without),
                ("max_marginal_dependence".to_string(), o.marginal_dependence),
            ]);
            witnesses.push(modularity_witness(
                WitnessRole::Violation,
                scenario,
                evidence,
                prior,
                observed,
                o.posterior_deviation,
            ));
        }
    }
    report.scenarios_skipped = report.skipped.len();
    report.counts = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let nonmodular = report.scenarios_tested - report.count("modular_scenarios");
    report.verdict = if nonmodular > 0 {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    sort_witnesses(&mut witnesses);
    report.witnesses = witnesses;
    report.notes.push(
        "if p(H|E e) were a modular update then choosing E = ∅ gives p(H|e) = p(H): \
         evidence would be marginally independent of the hypothesis"
            .into(),
    );
    let confirmed = report.count("modular_marginally_dependent") == 0;
    report.conclusion = format!(
        "reductio {}: {} of {} informative scenarios violate posterior modularity; \
         {} of {} uninformative scenarios satisfy it; every modular scenario is marginally independent: {}",
        if confirmed { "confirmed" } else { "NOT confirmed" },
        report.count("informative_violating"),
        report.count("informative_scenarios"),
        report.count("uninformative_satisfying"),
        report.count("uninformative_scenarios"),
        confirmed
    );
    Ok(report)
}

/// How well `CF(H,E)` approximates `p(H|E)` when the prior is small.
///
/// For confirming evidence `CF - p(H|E) = -p(H)(1 - p(H|E)) / (1 - p(H))`
/// exactly; the check verifies that bound numerically and reports the
/// largest gap. Scenarios with prior `>= epsilon` are excluded.
pub fn check_cf_limit_case(family: &ScenarioFamily, epsilon: f64) -> Result<AuditReport, AuditError> {
    check_tolerance("epsilon", epsilon)?;
    let scenarios = family.scenarios()?;
    let mut report = AuditReport::new("cf", Axiom::CfLimit, family, epsilon);
    report.scenarios_total = scenarios.len();
    let mut excluded = 0usize;
    let mut confirming = 0usize;
    let mut non_confirming = 0usize;
    let mut within_bound = 0usize;
    let mut worst: Option<(f64, usize, EvidenceSet, f64, f64, f64)> = None;
    let mut max_prior: f64 = 0.0;
    let mut non_confirming_max: f64 = 0.0;
    for scenario in &scenarios {
        let dist = &scenario.dist;
        let h = dist.hypothesis();
        let none = EvidenceSet::empty();
        let prior = dist.posterior(&h, &none)?;
        if prior >= epsilon {
            excluded += 1;
            continue;
        }
        let sets = dist.evidence_conjunctions(false);
        if let Err(reason) = sets.iter().try_for_each(|e| guard_masses(dist, &h, &[&none, e])) {
            report.skipped.push(SkippedScenario {
                scenario_id: scenario.id,
                reason,
            });
            continue;
        }
        report.scenarios_tested += 1;
        max_prior = max_prior.max(prior);
        for e in sets {
            report.comparisons += 1;
            let post = dist.posterior(&h, &e)?;
            let cf = cf_from_probabilities(prior, post)?;
            let diff = (cf - post).abs();
            if post > prior {
                confirming += 1;
                let bound = prior * (1.0 - post) / (1.0 - prior);
                if diff <= bound + 1e-12 {
                    within_bound += 1;
                }
                if worst.as_ref().is_none_or(|w| diff > w.0) {
                    worst = Some((diff, scenario.id, e, prior, post, cf));
                }
            } else {
                non_confirming += 1;
                non_confirming_max = non_confirming_max.max(diff);
            }
        }
    }
    report.scenarios_skipped = report.skipped.len();
    report.counts = BTreeMap::from([
        ("excluded_prior_at_least_epsilon".to_string(), excluded),
        ("confirming_comparisons".to_string(), confirming),
        ("non_confirming_comparisons".to_string(), non_confirming),
        ("within_bound".to_string(), within_bound),
    ]);
    let max_diff = worst.as_ref().map_or(0.0, |w| w.0);
    report.max_deviation = max_diff;
    report.push_quantity(
        "max_confirming_difference",
        max_diff,
        "max |CF(H,E) - p(H|E)| over evidence with p(H|E) > p(H)",
    );
    report.push_quantity("max_prior", max_prior, "largest p(H) among included scenarios");
    report.push_quantity(
        "max_non_confirming_difference",
        non_confirming_max,
        "max |CF(H,E) - p(H|E)| where p(H|E) <= p(H); the approximation does not apply",
    );
    if let Some((diff, id, e, prior, post, cf)) = &worst {
        report.push_quantity(
            "worst_case_prior",
            *prior,
            format!("scenario {id}, E = {e}"),
        );
        report.push_quantity(
            "worst_case_posterior",
            *post,
            format!("p(H|E) by enumeration; CF = ({post:.6} - {prior:.3e}) / (1 - {prior:.3e}) = {cf:.6}"),
        );
        report.push_quantity(
            "worst_case_bound",
            prior * (1.0 - post) / (1.0 - prior),
            format!("p(H)(1 - p(H|E))/(1 - p(H)) vs observed {diff:.3e}"),
        );
    }
    let ok = within_bound == confirming && max_diff < epsilon;
    report.verdict = if ok { Verdict::Holds } else { Verdict::Violated };
    report.notes.push(
        "if CF(H,E,e) ~ p(H|E e) whenever p(H|e) ~ 0, modularity with E = ∅ forces p(H|e) = p(H)".into(),
    );
    report.conclusion = if ok {
        format!(
            "CF(H,E) approximates p(H|E) within {max_diff:.3e} for priors below {epsilon:e}; \
             every confirming case is within the exact bound p(H)(1-p(H|E))/(1-p(H))"
        )
    } else {
        format!("approximation bound failed in {} of {confirming} confirming cases", confirming - within_bound)
    };
    Ok(report)
}

/// The fixed modularity counterexample: `p(H) = .01`, two conditionally
/// independent findings each with likelihood ratio 99.
pub fn reproduce_mycin_counterexample() -> Result<AuditReport, AuditError> {
    let model = counterexample_model();
    let dist = JointDistribution::from_naive_bayes(&model)?;
    let family = ScenarioFamily::mycin_counterexample();
    let h = Proposition::positive("H");
    let none = EvidenceSet::empty();
    let e1 = EvidenceSet::single(Proposition::positive("E1"));
    let e2 = EvidenceSet::single(Proposition::positive("E2"));
    let e12 = e1.union(&e2)?;

    let prior = dist.posterior(&h, &none)?;
    let lambda1 = dist.likelihood_ratio(&h, &e1, &none)?;
    let lambda2_given_1 = dist.likelihood_ratio(&h, &e2, &e1)?;
    let p1 = dist.posterior(&h, &e1)?;
    let p2 = dist.posterior(&h, &e2)?;
    let p12 = dist.posterior(&h, &e12)?;
    let cf1 = certainty_factor_conditional(&dist, &h, &e1, &none)?;
    let cf2 = certainty_factor_conditional(&dist, &h, &e2, &none)?;
    let cf12 = certainty_factor_conditional(&dist, &h, &e12, &none)?;
    let cf2_given_1 = certainty_factor_conditional(&dist, &h, &e2, &e1)?;
    let gap = (cf2_given_1 - cf2).abs();
    let modular_combination = mycin_combine(cf1, cf2)?;
    let chained_combination = mycin_combine(cf1, cf2_given_1)?;

    let general = check_modularity(&CertaintyFactorMeasure, &family, super::DEFAULT_TOLERANCE)?;
    let mut report = AuditReport::new("cf", Axiom::MycinCounterexample, &family, super::DEFAULT_TOLERANCE);
    report.scenarios_total = general.scenarios_total;
    report.scenarios_tested = general.scenarios_tested;
    report.scenarios_skipped = general.scenarios_skipped;
    report.skipped = general.skipped.clone();
    report.comparisons = general.comparisons;
    report.max_deviation = general.max_deviation;
    report.counts = general.counts.clone();

    let prior_odds = prior / (1.0 - prior);
    report.push_quantity("p(H)", prior, "fixed prior");
    report.push_quantity(
        "lambda(H,E1)",
        lambda1,
        format!(
            "p(E1|H)/p(E1|~H) = {}/{} by enumeration",
            model.findings()[0].p_given_h,
            model.findings()[0].p_given_not_h
        ),
    );
    report.push_quantity(
        "lambda(H,E2,E1)",
        lambda2_given_1,
        "equals lambda(H,E2) under conditional independence",
    );
    report.push_quantity(
        "p(H|E1)",
        p1,
        format!("odds {prior_odds:.6} x {lambda1:.4} = {:.6} -> p = odds/(1+odds)", prior_odds * lambda1),
    );
    report.push_quantity(
        "p(H|E1E2)",
        p12,
        format!(
            "odds {prior_odds:.6} x {lambda1:.4}^2 = {:.6} -> p = odds/(1+odds)",
            prior_odds * lambda1 * lambda1
        ),
    );
    report.push_quantity(
        "CF(H,E1,∅)",
        cf1,
        format!("(p(H|E1) - p(H))/(1 - p(H)) = ({p1:.6} - {prior:.6})/(1 - {prior:.6})"),
    );
    report.push_quantity(
        "CF(H,E2,∅)",
        cf2,
        format!("(p(H|E2) - p(H))/(1 - p(H)) = ({p2:.6} - {prior:.6})/(1 - {prior:.6})"),
    );
    report.push_quantity(
        "CF(H,E2,E1)",
        cf2_given_1,
        format!("(p(H|E1E2) - p(H|E1))/(1 - p(H|E1)) = ({p12:.6} - {p1:.6})/(1 - {p1:.6})"),
    );
    report.push_quantity(
        "CF(H,E1E2,∅)",
        cf12,
        format!("(p(H|E1E2) - p(H))/(1 - p(H)) = ({p12:.6} - {prior:.6})/(1 - {prior:.6})"),
    );
    report.push_quantity(
        "modularity_gap",
        gap,
        format!("|CF(H,E2,E1) - CF(H,E2,∅)| = |{cf2_given_1:.6} - {cf2:.6}|"),
    );
    report.push_quantity(
        "combine(CF(H,E1),CF(H,E2))",
        modular_combination,
        format!("x + y - xy with x = y = {cf1:.6}; what a modular rulebase computes"),
    );
    report.push_quantity(
        "combine(CF(H,E1),CF(H,E2,E1))",
        chained_combination,
        format!("x + y - xy with x = {cf1:.6}, y = {cf2_given_1:.6}; equals CF(H,E1E2,∅)"),
    );

    let scenario = Scenario {
        id: 0,
        label: "explicit model 0".into(),
        dist,
    };
    let observed = BTreeMap::from([
        ("update_given_prior".to_string(), cf2_given_1),
        ("update_without_prior".to_string(), cf2),
    ]);
    report.witnesses.push(modularity_witness(
        WitnessRole::Violation,
        &scenario,
        &e2,
        &e1,
        observed,
        gap,
    ));
    report.witnesses.extend(
        general
            .witnesses
            .into_iter()
            .filter(|w| !(w.evidence == e2 && w.prior_evidence == e1)),
    );
    report.witnesses.truncate(super::MAX_WITNESSES);
    report.verdict = if gap > report.tolerance {
        Verdict::Violated
    } else {
        Verdict::Holds
    };
    report.notes.push(
        "each finding has likelihood ratio 99 (p(E|H) = .99, p(E|~H) = .01); a ratio of .99 \
         could not raise p(H) from .01 to .5"
            .into(),
    );
    report.notes.push(
        "CF(H,E1,∅) ≈ .5, inside the [-1, 1] range of certainty factors".into(),
    );
    report.conclusion = format!(
        "certainty factors are not modular under conditional independence: CF(H,E2,E1) = {cf2_given_1:.5} \
         but CF(H,E2,∅) = {cf2:.5} (gap {gap:.5}); lambda stays {lambda2_given_1:.4} either way"
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{ModelSpec, NaiveBayesModel};

    #[test]
    fn counterexample_quantities() {
        let r = reproduce_mycin_counterexample().unwrap();
        let q = |n: &str| r.quantity(n).unwrap();
        assert!((q("p(H|E1)") - 0.5).abs() < 1e-9);
        assert!((q("p(H|E1E2)") - 0.99).abs() < 1e-9);
        assert!((q("CF(H,E1,∅)") - 0.49495).abs() < 1e-5);
        assert!((q("CF(H,E1E2,∅)") - 0.98990).abs() < 1e-5);
        assert!((q("CF(H,E2,E1)") - 0.98).abs() < 1e-9);
        assert!((q("modularity_gap") - 0.485).abs() < 1e-3);
        assert!((q("lambda(H,E2,E1)") - 99.0).abs() < 1e-9);
        assert!((q("combine(CF(H,E1),CF(H,E2,E1))") - q("CF(H,E1E2,∅)")).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.witnesses[0].prior_evidence.to_string(), "E1");
    }

    #[test]
    fn uninformative_model_is_degenerate() {
        let family = ScenarioFamily::Explicit {
            models: vec![ModelSpec::NaiveBayes(
                NaiveBayesModel::from_ratios(0.3, &[1.0, 1.0]).unwrap(),
            )],
        };
        let r = check_marginal_independence_trap(&family, 1e-12).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.count("uninformative_satisfying"), 1);
        assert_eq!(r.count("modular_marginally_independent"), 1);
    }

    #[test]
    fn counterexample_posterior_is_not_modular() {
        let r = check_marginal_independence_trap(&ScenarioFamily::mycin_counterexample(), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert_eq!(r.count("informative_violating"), 1);
    }

    #[test]
    fn grid_reductio() {
        let r = check_marginal_independence_trap(&ScenarioFamily::ci_grid(2), 1e-9).unwrap();
        assert_eq!(r.count("informative_violating"), r.count("informative_scenarios"));
        assert_eq!(r.count("uninformative_satisfying"), r.count("uninformative_scenarios"));
        assert_eq!(r.count("uninformative_scenarios"), 6);
        assert_eq!(r.count("modular_marginally_dependent"), 0);
    }

    #[test]
    fn cf_limit_examples() {
        // p(H) = 1e-6, p(H|E) = .5 needs lambda = odds ratio (1)/(1e-6/(1-1e-6)).
        let lambda = (1.0 - 1e-6) / 1e-6;
        let family = ScenarioFamily::Explicit {
            models: vec![ModelSpec::NaiveBayes(
                NaiveBayesModel::from_ratios(1e-6, &[lambda]).unwrap(),
            )],
        };
        let r = check_cf_limit_case(&family, 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((r.quantity("worst_case_posterior").unwrap() - 0.5).abs() < 1e-9);
        assert!(r.quantity("max_confirming_difference").unwrap() < 1e-6);

        let cf = cf_from_probabilities(0.01, 0.5).unwrap();
        assert!(((0.5 - cf) - 0.00505).abs() < 1e-5);
        assert_eq!(cf_from_probabilities(0.2, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn cf_limit_excludes_large_priors() {
        let r = check_cf_limit_case(&ScenarioFamily::ci_grid(2), 0.05).unwrap();
        assert_eq!(r.count("excluded_prior_at_least_epsilon"), 125);
        assert_eq!(r.scenarios_tested, 25);
        assert_eq!(r.count("within_bound"), r.count("confirming_comparisons"));
    }
}
