use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::calculi::{mycin_combine, posterior_from_weight, CalcError, CalculusKind, CalculusValue};
use crate::prob::JointDistribution;

use super::{CaseRecord, EngineError, Rule, Rulebase};

/// A combined strength. Evoking strengths sum into an unbounded score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Accumulated {
    Lambda(f64),
    Weight(f64),
    Cf(f64),
    Score(u32),
}

impl Accumulated {
    pub fn identity(kind: CalculusKind) -> Result<Self, EngineError> {
        Ok(match kind {
            CalculusKind::Lambda => Accumulated::Lambda(1.0),
            CalculusKind::Weight => Accumulated::Weight(0.0),
            CalculusKind::Cf => Accumulated::Cf(0.0),
            CalculusKind::Evoking => Accumulated::Score(0),
            CalculusKind::Posterior => return Err(EngineError::UnsupportedKind(kind)),
        })
    }

    pub fn kind(self) -> CalculusKind {
        match self {
            Accumulated::Lambda(_) => CalculusKind::Lambda,
            Accumulated::Weight(_) => CalculusKind::Weight,
            Accumulated::Cf(_) => CalculusKind::Cf,
            Accumulated::Score(_) => CalculusKind::Evoking,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Accumulated::Lambda(v) | Accumulated::Weight(v) | Accumulated::Cf(v) => v,
            Accumulated::Score(s) => f64::from(s),
        }
    }

    fn in_range(self) -> bool {
        match self {
            Accumulated::Lambda(v) => v.is_finite() && v > 0.0,
            Accumulated::Weight(v) => v.is_finite(),
            Accumulated::Cf(v) => (-1.0..=1.0).contains(&v),
            Accumulated::Score(_) => true,
        }
    }

    /// One combination step; fails if the result leaves the legal range.
    pub fn combine(self, strength: CalculusValue) -> Result<Self, EngineError> {
        let next = match (self, strength) {
            (Accumulated::Lambda(a), CalculusValue::Lambda(b)) => Accumulated::Lambda(a * b),
            (Accumulated::Weight(a), CalculusValue::Weight(b)) => Accumulated::Weight(a + b),
            (Accumulated::Cf(a), CalculusValue::Cf(b)) => Accumulated::Cf(mycin_combine(a, b)?),
            (Accumulated::Score(a), CalculusValue::Evoking(b)) => {
                Accumulated::Score(a + u32::from(b))
            }
            (acc, s) => {
                return Err(CalcError::KindMismatch {
                    expected: acc.kind(),
                    found: s.kind(),
                }
                .into())
            }
        };
        if !next.in_range() {
            return Err(CalcError::OutOfRange {
                kind: next.kind(),
                value: next.value(),
            }
            .into());
        }
        Ok(next)
    }
}

impl Serialize for Accumulated {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Accumulated", 2)?;
        s.serialize_field("kind", &self.kind())?;
        s.serialize_field("value", &self.value())?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisBelief {
    pub hypothesis: String,
    pub accumulated: Accumulated,
    /// Ids of the rules that fired, in combination order.
    pub fired: Vec<String>,
    pub prior: Option<f64>,
    /// Reconstructed for likelihood-ratio and weight calculi when a prior
    /// is known.
    pub posterior: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefState {
    pub case_id: String,
    pub calculus: CalculusKind,
    pub hypotheses: Vec<HypothesisBelief>,
}

impl BeliefState {
    pub fn belief(&self, hypothesis: &str) -> Option<&HypothesisBelief> {
        self.hypotheses.iter().find(|b| b.hypothesis == hypothesis)
    }
}

fn reconstruct(rulebase: &Rulebase, acc: Accumulated, prior: f64) -> Result<Option<f64>, EngineError> {
    Ok(match acc {
        Accumulated::Weight(w) => Some(posterior_from_weight(prior, w, rulebase.log_base())?),
        Accumulated::Lambda(l) => Some(posterior_from_weight(prior, l.ln(), crate::calculi::LogBase::NATURAL)?),
        Accumulated::Cf(_) | Accumulated::Score(_) => None,
    })
}

/// Folds the strengths of every rule whose evidence literal is observed.
///
/// Rules fire in a canonical order (evidence literal, then id), so the
/// result does not depend on how the rulebase lists them. `priors`
/// overrides the rulebase's own.
pub fn evaluate_case(
    rulebase: &Rulebase,
    case: &CaseRecord,
    calculus: CalculusKind,
    priors: Option<&BTreeMap<String, f64>>,
) -> Result<BeliefState, EngineError> {
    if calculus != rulebase.kind() {
        return Err(CalcError::KindMismatch {
            expected: calculus,
            found: rulebase.kind(),
        }
        .into());
    }
    for v in case.observed.variables() {
        if !rulebase.mentions_evidence(v) {
            return Err(EngineError::UnknownFinding {
                case: case.id.clone(),
                variable: v.to_string(),
            });
        }
    }
    let priors = priors.unwrap_or(rulebase.priors());
    let mut hypotheses = Vec::new();
    for h in rulebase.hypotheses() {
        let mut fired: Vec<&Rule> = rulebase
            .rules()
            .iter()
            .filter(|r| r.hypothesis.variable() == h && case.observed.contains(&r.evidence))
            .collect();
        fired.sort_by(|a, b| {
            (a.evidence.variable(), a.evidence.polarity(), &a.id)
                .cmp(&(b.evidence.variable(), b.evidence.polarity(), &b.id))
        });
        let mut acc = Accumulated::identity(calculus)?;
        for rule in &fired {
            acc = acc.combine(rule.strength)?;
        }
        let prior = priors.get(&h).copied();
        let posterior = match prior {
            Some(p) => reconstruct(rulebase, acc, p)?,
            None => None,
        };
        hypotheses.push(HypothesisBelief {
            hypothesis: h,
            accumulated: acc,
            fired: fired.iter().map(|r| r.id.clone()).collect(),
            prior,
            posterior,
        });
    }
    Ok(BeliefState {
        case_id: case.id.clone(),
        calculus,
        hypotheses,
    })
}

/// [`evaluate_case`] over many cases, in parallel, preserving order.
pub fn evaluate_cases(
    rulebase: &Rulebase,
    cases: &[CaseRecord],
    calculus: CalculusKind,
    priors: Option<&BTreeMap<String, f64>>,
) -> Result<Vec<BeliefState>, EngineError> {
    cases
        .par_iter()
        .map(|c| evaluate_case(rulebase, c, calculus, priors))
        .collect()
}

/// `p(H | observed)` by enumeration of the model's joint table.
pub fn ground_truth(model: &JointDistribution, case: &CaseRecord) -> Result<f64, EngineError> {
    for v in case.observed.variables() {
        if model.schema().evidence_index(v).is_none() {
            return Err(EngineError::UncoveredVariable {
                hypothesis: model.schema().hypothesis().to_string(),
                variable: v.to_string(),
            });
        }
    }
    Ok(model.posterior(&model.hypothesis(), &case.observed)?)
}

/// Aligned text, one line per case and hypothesis.
pub fn beliefs_to_text(states: &[BeliefState]) -> String {
    let mut rows = vec![[
        "case".to_string(),
        "hypothesis".into(),
        "calculus".into(),
        "accumulated".into(),
        "prior".into(),
        "posterior".into(),
        "fired".into(),
    ]];
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.9}"));
    for s in states {
        for b in &s.hypotheses {
            rows.push([
                s.case_id.clone(),
                b.hypothesis.clone(),
                s.calculus.to_string(),
                format!("{:.9}", b.accumulated.value()),
                opt(b.prior),
                opt(b.posterior),
                if b.fired.is_empty() { "-".into() } else { b.fired.join(",") },
            ]);
        }
    }
    super::compare::align(&rows)
}

/// CSV with a header row, one record per case and hypothesis.
pub fn beliefs_to_csv(states: &[BeliefState]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "hypothesis", "calculus", "accumulated", "prior", "posterior", "fired"])
        .expect("in-memory write");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for s in states {
        for b in &s.hypotheses {
            w.write_record([
                s.case_id.clone(),
                b.hypothesis.clone(),
                s.calculus.to_string(),
                b.accumulated.value().to_string(),
                opt(b.prior),
                opt(b.posterior),
                b.fired.join(" "),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculi::{EvokingThresholds, LogBase};
    use crate::prob::{EvidenceSet, NaiveBayesModel, Proposition};

    fn case(lits: &[&str]) -> CaseRecord {
        let set = EvidenceSet::from_literals(lits.iter().map(|s| s.parse::<Proposition>().unwrap())).unwrap();
        CaseRecord::new("c", set)
    }

    fn counterexample() -> JointDistribution {
        JointDistribution::from_naive_bayes(&NaiveBayesModel::from_ratios(0.01, &[99.0, 99.0]).unwrap())
            .unwrap()
    }

    #[test]
    fn empty_case_gives_identities() {
        let d = counterexample();
        let t = EvokingThresholds::default();
        for (kind, id) in [
            (CalculusKind::Lambda, 1.0),
            (CalculusKind::Weight, 0.0),
            (CalculusKind::Cf, 0.0),
            (CalculusKind::Evoking, 0.0),
        ] {
            let rb = Rulebase::derive(&d, kind, LogBase::NATURAL, &t).unwrap();
            let s = evaluate_case(&rb, &case(&[]), kind, None).unwrap();
            assert_eq!(s.hypotheses[0].accumulated.value(), id);
            assert!(s.hypotheses[0].fired.is_empty());
        }
    }

    #[test]
    fn weights_reach_the_enumerated_posterior() {
        let d = counterexample();
        let rb = Rulebase::derive(&d, CalculusKind::Weight, LogBase::NATURAL, &EvokingThresholds::default())
            .unwrap();
        let c = case(&["E1", "E2"]);
        let s = evaluate_case(&rb, &c, CalculusKind::Weight, None).unwrap();
        let b = &s.hypotheses[0];
        assert!((b.accumulated.value() - 2.0 * 99f64.ln()).abs() < 1e-12);
        assert!((b.posterior.unwrap() - 0.99).abs() < 1e-12);
        assert!((ground_truth(&d, &c).unwrap() - 0.99).abs() < 1e-12);
    }

    #[test]
    fn cf_rules_combine() {
        let text = r#"{"kind":"cf","rules":[
            {"id":"a","evidence":"E1","hypothesis":"H","strength":0.5},
            {"id":"b","evidence":"E2","hypothesis":"H","strength":0.5}]}"#;
        let rb = Rulebase::from_json(text).unwrap();
        let s = evaluate_case(&rb, &case(&["E1", "E2"]), CalculusKind::Cf, None).unwrap();
        assert!((s.hypotheses[0].accumulated.value() - 0.75).abs() < 1e-15);
        assert_eq!(s.hypotheses[0].posterior, None);
        // Absent evidence fires no cf rule.
        let s = evaluate_case(&rb, &case(&["~E1"]), CalculusKind::Cf, None).unwrap();
        assert_eq!(s.hypotheses[0].accumulated.value(), 0.0);
    }

    #[test]
    fn contradiction_and_mismatch_propagate() {
        let text = r#"{"kind":"cf","rules":[
            {"id":"a","evidence":"E1","hypothesis":"H","strength":1},
            {"id":"b","evidence":"E2","hypothesis":"H","strength":-1}]}"#;
        let rb = Rulebase::from_json(text).unwrap();
        assert!(matches!(
            evaluate_case(&rb, &case(&["E1", "E2"]), CalculusKind::Cf, None),
            Err(EngineError::Calc(CalcError::ContradictoryCertainty))
        ));
        assert!(matches!(
            evaluate_case(&rb, &case(&[]), CalculusKind::Weight, None),
            Err(EngineError::Calc(CalcError::KindMismatch { .. }))
        ));
        assert!(matches!(
            evaluate_case(&rb, &case(&["E9"]), CalculusKind::Cf, None),
            Err(EngineError::UnknownFinding { .. })
        ));
    }

    #[test]
    fn ground_truth_examples() {
        let d = counterexample();
        assert!((ground_truth(&d, &case(&[])).unwrap() - 0.01).abs() < 1e-15);
        let sym = NaiveBayesModel::new(
            "H",
            0.5,
            vec![
                crate::prob::Finding::new("E1", 0.8, 0.2),
                crate::prob::Finding::new("E2", 0.8, 0.2),
            ],
        )
        .unwrap();
        let sym = JointDistribution::from_naive_bayes(&sym).unwrap();
        assert!((ground_truth(&sym, &case(&["E1", "~E2"])).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            ground_truth(&sym, &case(&["E7"])),
            Err(EngineError::UncoveredVariable { .. })
        ));
    }

    #[test]
    fn renderers_list_every_hypothesis() {
        let d = counterexample();
        let rb = Rulebase::derive(&d, CalculusKind::Lambda, LogBase::NATURAL, &EvokingThresholds::default())
            .unwrap();
        let s = vec![evaluate_case(&rb, &case(&["E1"]), CalculusKind::Lambda, None).unwrap()];
        assert_eq!(beliefs_to_csv(&s).lines().count(), 2);
        assert!(beliefs_to_text(&s).contains("0.500000000"));
    }
}
