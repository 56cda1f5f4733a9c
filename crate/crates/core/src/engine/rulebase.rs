use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculi::{
    cf_from_probabilities, CalculusKind, CalculusValue, EvokingThresholds, LogBase,
};
use crate::prob::{EvidenceSet, JointDistribution, Polarity, Proposition};

use super::EngineError;

/// `IF evidence THEN hypothesis` with a strength in the rulebase's calculus.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: String,
    pub evidence: Proposition,
    pub hypothesis: Proposition,
    pub strength: CalculusValue,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    id: String,
    evidence: Proposition,
    hypothesis: Proposition,
    strength: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRulebase {
    kind: CalculusKind,
    #[serde(default)]
    log_base: LogBase,
    #[serde(default)]
    priors: BTreeMap<String, f64>,
    rules: Vec<RawRule>,
}

/// A set of rules sharing one strength kind, with optional priors per
/// hypothesis for posterior reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRulebase", into = "RawRulebase")]
pub struct Rulebase {
    kind: CalculusKind,
    log_base: LogBase,
    priors: BTreeMap<String, f64>,
    rules: Vec<Rule>,
}

impl TryFrom<RawRulebase> for Rulebase {
    type Error = EngineError;

    fn try_from(raw: RawRulebase) -> Result<Self, EngineError> {
        let rules = raw
            .rules
            .into_iter()
            .map(|r| {
                Ok(Rule {
                    strength: CalculusValue::new(raw.kind, r.strength)?,
                    id: r.id,
                    evidence: r.evidence,
                    hypothesis: r.hypothesis,
                })
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        Rulebase::new(raw.kind, raw.log_base, raw.priors, rules)
    }
}

impl From<Rulebase> for RawRulebase {
    fn from(rb: Rulebase) -> Self {
        RawRulebase {
            kind: rb.kind,
            log_base: rb.log_base,
            priors: rb.priors,
            rules: rb
                .rules
                .into_iter()
                .map(|r| RawRule {
                    id: r.id,
                    evidence: r.evidence,
                    hypothesis: r.hypothesis,
                    strength: r.strength.value(),
                })
                .collect(),
        }
    }
}

impl Rulebase {
    pub fn new(
        kind: CalculusKind,
        log_base: LogBase,
        priors: BTreeMap<String, f64>,
        rules: Vec<Rule>,
    ) -> Result<Self, EngineError> {
        if kind == CalculusKind::Posterior {
            return Err(EngineError::UnsupportedKind(kind));
        }
        let mut ids = BTreeSet::new();
        let mut pairs = BTreeSet::new();
        let mut evidence_vars = BTreeSet::new();
        let mut hypothesis_vars: BTreeSet<&str> = priors.keys().map(String::as_str).collect();
        for rule in &rules {
            if rule.strength.kind() != kind {
                return Err(crate::calculi::CalcError::KindMismatch {
                    expected: kind,
                    found: rule.strength.kind(),
                }
                .into());
            }
            rule.strength.validate()?;
            if !rule.hypothesis.is_positive() {
                return Err(EngineError::NegatedHypothesis(rule.id.clone()));
            }
            if !ids.insert(rule.id.as_str()) {
                return Err(EngineError::DuplicateRuleId(rule.id.clone()));
            }
            if !pairs.insert((rule.evidence.to_string(), rule.hypothesis.variable())) {
                return Err(EngineError::DuplicateRule {
                    evidence: rule.evidence.to_string(),
                    hypothesis: rule.hypothesis.to_string(),
                });
            }
            evidence_vars.insert(rule.evidence.variable());
            hypothesis_vars.insert(rule.hypothesis.variable());
        }
        if let Some(v) = evidence_vars.intersection(&hypothesis_vars).next() {
            return Err(EngineError::RoleConflict(v.to_string()));
        }
        for (h, &p) in &priors {
            if !(p > 0.0 && p < 1.0) {
                return Err(crate::calculi::CalcError::InvalidPrior(p).into());
            }
            if !crate::prob::valid_name(h) {
                return Err(EngineError::Malformed(format!("invalid hypothesis name `{h}`")));
            }
        }
        Ok(Rulebase {
            kind,
            log_base,
            priors,
            rules,
        })
    }

    /// Rules read off an enumerated distribution: one per evidence literal,
    /// with the strength the calculus assigns given no prior evidence.
    ///
    /// Likelihood-ratio and weight rules cover both polarities. Certainty
    /// factor and evoking rules cover present findings only.
    pub fn derive(
        dist: &JointDistribution,
        kind: CalculusKind,
        log_base: LogBase,
        thresholds: &EvokingThresholds,
    ) -> Result<Self, EngineError> {
        let h = dist.hypothesis();
        let none = EvidenceSet::empty();
        let prior = dist.posterior(&h, &none)?;
        let mut rules = Vec::new();
        for name in dist.schema().evidence() {
            let polarities: &[Polarity] = match kind {
                CalculusKind::Lambda | CalculusKind::Weight => {
                    &[Polarity::Positive, Polarity::Negated]
                }
                _ => &[Polarity::Positive],
            };
            for &polarity in polarities {
                let lit = Proposition::new(name.clone(), polarity);
                let set = EvidenceSet::single(lit.clone());
                let value = match kind {
                    CalculusKind::Lambda => dist.likelihood_ratio(&h, &set, &none)?,
                    CalculusKind::Weight => log_base.log(dist.likelihood_ratio(&h, &set, &none)?),
                    CalculusKind::Cf => cf_from_probabilities(prior, dist.posterior(&h, &set)?)?,
                    CalculusKind::Evoking => {
                        f64::from(thresholds.strength(dist.posterior(&h, &set)?)?)
                    }
                    CalculusKind::Posterior => return Err(EngineError::UnsupportedKind(kind)),
                };
                rules.push(Rule {
                    id: format!("{}:{}:{}", kind.as_str(), h.variable(), lit),
                    evidence: lit,
                    hypothesis: h.clone(),
                    strength: CalculusValue::new(kind, value)?,
                });
            }
        }
        let priors = BTreeMap::from([(h.variable().to_string(), prior)]);
        Rulebase::new(kind, log_base, priors, rules)
    }

    /// Concatenates rulebases of the same kind and log base.
    pub fn merge(parts: Vec<Rulebase>) -> Result<Self, EngineError> {
        let mut iter = parts.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| EngineError::Malformed("nothing to merge".into()))?;
        let (kind, log_base) = (first.kind, first.log_base);
        let mut priors = first.priors;
        let mut rules = first.rules;
        for rb in iter {
            if rb.kind != kind {
                return Err(crate::calculi::CalcError::KindMismatch {
                    expected: kind,
                    found: rb.kind,
                }
                .into());
            }
            if rb.log_base != log_base {
                return Err(EngineError::Malformed("rulebases use different log bases".into()));
            }
            priors.extend(rb.priors);
            rules.extend(rb.rules);
        }
        Rulebase::new(kind, log_base, priors, rules)
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rulebases serialize")
    }

    pub fn kind(&self) -> CalculusKind {
        self.kind
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    pub fn priors(&self) -> &BTreeMap<String, f64> {
        &self.priors
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Hypothesis names from rules and priors, sorted.
    pub fn hypotheses(&self) -> Vec<String> {
        let mut set: BTreeSet<&str> = self.priors.keys().map(String::as_str).collect();
        set.extend(self.rules.iter().map(|r| r.hypothesis.variable()));
        set.into_iter().map(str::to_string).collect()
    }

    pub fn mentions_evidence(&self, variable: &str) -> bool {
        self.rules.iter().any(|r| r.evidence.variable() == variable)
    }

    /// Same rules in a different order.
    pub fn with_rules_permuted(&self, order: &[usize]) -> Self {
        let mut out = self.clone();
        out.rules = order.iter().map(|&i| self.rules[i].clone()).collect();
        out
    }
}

/// One case: the findings observed present or absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseRecord {
    pub id: String,
    #[serde(default)]
    pub observed: EvidenceSet,
}

impl CaseRecord {
    pub fn new(id: impl Into<String>, observed: EvidenceSet) -> Self {
        CaseRecord {
            id: id.into(),
            observed,
        }
    }
}

/// `{"cases": [...]}` on disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub cases: Vec<CaseRecord>,
}

impl CaseFile {
    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        let file: CaseFile =
            serde_json::from_str(text).map_err(|e| EngineError::Malformed(e.to_string()))?;
        let mut seen = BTreeSet::new();
        for c in &file.cases {
            if !seen.insert(c.id.as_str()) {
                return Err(EngineError::DuplicateCaseId(c.id.clone()));
            }
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cases serialize")
    }
}

fn case_id(observed: &EvidenceSet) -> String {
    if observed.is_empty() {
        "none".to_string()
    } else {
        observed.to_vec().iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

/// Every present/absent/unobserved combination over `variables`.
pub fn exhaustive_cases(variables: &[String]) -> Vec<CaseRecord> {
    let mut sets = vec![EvidenceSet::empty()];
    for v in variables {
        let mut next = Vec::with_capacity(sets.len() * 3);
        for s in &sets {
            next.push(s.clone());
            for pol in [Polarity::Positive, Polarity::Negated] {
                next.push(
                    s.clone()
                        .with(Proposition::new(v.clone(), pol))
                        .expect("fresh variable"),
                );
            }
        }
        sets = next;
    }
    sets.into_iter()
        .map(|s| CaseRecord::new(case_id(&s), s))
        .collect()
}

/// `count` cases with each variable independently present, absent or
/// unobserved with equal probability. Ids are `case-<k>`.
pub fn sampled_cases(variables: &[String], count: usize, seed: u64) -> Vec<CaseRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut set = EvidenceSet::empty();
            for v in variables {
                match rng.random_range(0..3u8) {
                    1 => set.insert(Proposition::positive(v.clone())).expect("fresh"),
                    2 => set.insert(Proposition::negated(v.clone())).expect("fresh"),
                    _ => {}
                }
            }
            CaseRecord::new(format!("case-{k}"), set)
        })
        .collect()
}
