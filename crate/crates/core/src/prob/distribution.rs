use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::proposition::valid_name;
use super::{EvidenceSet, NaiveBayesModel, Polarity, ProbError, Proposition};

/// Default cap on evidence variables (2^17 table entries).
pub const DEFAULT_MAX_EVIDENCE: usize = 16;
/// Hard limit imposed by the 32-bit assignment index.
pub const MAX_SUPPORTED_EVIDENCE: usize = 30;
/// Input tables must sum to 1 within this before renormalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

const CONSTRUCTED_TOLERANCE: f64 = 1e-12;

/// Variable names of a distribution: one hypothesis and `n` evidence
/// variables, all binary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    hypothesis: String,
    evidence: Vec<String>,
}

impl Schema {
    pub fn new<S: Into<String>>(
        hypothesis: impl Into<String>,
        evidence: impl IntoIterator<Item = S>,
    ) -> Result<Self, ProbError> {
        let hypothesis = hypothesis.into();
        let evidence: Vec<String> = evidence.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for name in std::iter::once(&hypothesis).chain(evidence.iter()) {
            if !valid_name(name) {
                return Err(ProbError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(ProbError::DuplicateVariable(name.clone()));
            }
        }
        Ok(Self {
            hypothesis,
            evidence,
        })
    }

    /// Hypothesis `H`, evidence `E1..En`.
    pub fn numbered(arity: usize) -> Self {
        Self {
            hypothesis: "H".into(),
            evidence: (1..=arity).map(|i| format!("E{i}")).collect(),
        }
    }

    pub fn hypothesis(&self) -> &str {
        &self.hypothesis
    }

    pub fn evidence(&self) -> &[String] {
        &self.evidence
    }

    pub fn arity(&self) -> usize {
        self.evidence.len()
    }

    pub fn evidence_index(&self, name: &str) -> Option<usize> {
        self.evidence.iter().position(|v| v == name)
    }

    pub fn hypothesis_literal(&self) -> Proposition {
        Proposition::positive(self.hypothesis.clone())
    }
}

/// A conjunction resolved against a schema: the assignment bits it fixes
/// (`care`) and their required values (`value`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    care: u32,
    value: u32,
    contradictory: bool,
}

impl Event {
    pub const TRUE: Event = Event {
        care: 0,
        value: 0,
        contradictory: false,
    };

    pub fn and(self, other: Event) -> Event {
        let overlap = self.care & other.care;
        let clash = (self.value ^ other.value) & overlap != 0;
        Event {
            care: self.care | other.care,
            value: self.value | other.value,
            contradictory: self.contradictory || other.contradictory || clash,
        }
    }

    pub fn is_contradictory(self) -> bool {
        self.contradictory
    }

    fn matches(self, index: usize) -> bool {
        (index as u32) & self.care == self.value
    }
}

/// Exact probability table over one binary hypothesis and `n` binary
/// evidence variables.
///
/// Internally entry `i` has evidence variable `k` true iff bit `k` of `i`
/// is set, and the hypothesis true iff bit `n` is set. The external order
/// used by [`JointDistribution::from_table`] and [`JointDistribution::entries`]
/// is truth-table order with the hypothesis first and `true` before `false`,
/// so for one evidence variable: `H E`, `H ~E`, `~H E`, `~H ~E`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    schema: Schema,
    table: Vec<f64>,
}

impl JointDistribution {
    pub fn from_table(schema: Schema, entries: &[f64]) -> Result<Self, ProbError> {
        Self::from_table_with_cap(schema, entries, DEFAULT_MAX_EVIDENCE)
    }

    pub fn from_table_with_cap(
        schema: Schema,
        entries: &[f64],
        cap: usize,
    ) -> Result<Self, ProbError> {
        let n = check_arity(&schema, cap)?;
        let expected = 1usize << (n + 1);
        if entries.len() != expected {
            return Err(ProbError::WrongArity {
                expected,
                got: entries.len(),
            });
        }
        let mut table = vec![0.0; expected];
        for (row, &p) in entries.iter().enumerate() {
            if !p.is_finite() {
                return Err(ProbError::NonFiniteEntry { index: row });
            }
            if p < 0.0 {
                return Err(ProbError::NegativeProbability { index: row, value: p });
            }
            table[external_to_internal(row, n)] = p;
        }
        Self::normalized(schema, table, NORMALIZATION_TOLERANCE)
    }

    /// Expands `p(h) * prod_i p(a_i | h)` over every assignment.
    pub fn from_naive_bayes(model: &NaiveBayesModel) -> Result<Self, ProbError> {
        Self::from_naive_bayes_with_cap(model, DEFAULT_MAX_EVIDENCE)
    }

    pub fn from_naive_bayes_with_cap(
        model: &NaiveBayesModel,
        cap: usize,
    ) -> Result<Self, ProbError> {
        model.validate()?;
        let schema = Schema::new(
            model.hypothesis(),
            model.findings().iter().map(|f| f.name.clone()),
        )?;
        let n = check_arity(&schema, cap)?;
        let size = 1usize << (n + 1);
        let mut table = Vec::with_capacity(size);
        for index in 0..size {
            let h = index >> n & 1 == 1;
            let mut p = if h { model.prior() } else { 1.0 - model.prior() };
            for (k, finding) in model.findings().iter().enumerate() {
                let present = index >> k & 1 == 1;
                let rate = if h {
                    finding.p_given_h
                } else {
                    finding.p_given_not_h
                };
                p *= if present { rate } else { 1.0 - rate };
            }
            table.push(p);
        }
        Self::normalized(schema, table, CONSTRUCTED_TOLERANCE)
    }

    fn normalized(schema: Schema, mut table: Vec<f64>, tolerance: f64) -> Result<Self, ProbError> {
        let sum: f64 = table.iter().sum();
        if sum <= 0.0 {
            return Err(ProbError::ZeroTotalMass);
        }
        if (sum - 1.0).abs() > tolerance {
            return Err(ProbError::NotNormalized { sum, tolerance });
        }
        for p in &mut table {
            *p /= sum;
        }
        Ok(Self { schema, table })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn arity(&self) -> usize {
        self.schema.arity()
    }

    pub fn hypothesis(&self) -> Proposition {
        self.schema.hypothesis_literal()
    }

    /// Table entries in external (truth-table) order.
    pub fn entries(&self) -> Vec<f64> {
        let n = self.arity();
        (0..self.table.len())
            .map(|row| self.table[external_to_internal(row, n)])
            .collect()
    }

    /// Probability of one complete assignment.
    pub fn entry(&self, hypothesis: bool, evidence: &[bool]) -> Result<f64, ProbError> {
        let n = self.arity();
        if evidence.len() != n {
            return Err(ProbError::WrongArity {
                expected: n,
                got: evidence.len(),
            });
        }
        let mut index = (hypothesis as usize) << n;
        for (k, &v) in evidence.iter().enumerate() {
            index |= (v as usize) << k;
        }
        Ok(self.table[index])
    }

    fn bit_of(&self, variable: &str) -> Result<u32, ProbError> {
        if variable == self.schema.hypothesis {
            return Ok(self.arity() as u32);
        }
        self.schema
            .evidence_index(variable)
            .map(|k| k as u32)
            .ok_or_else(|| ProbError::UnknownVariable(variable.to_string()))
    }

    fn literal_event(&self, literal: &Proposition) -> Result<Event, ProbError> {
        let bit = 1u32 << self.bit_of(literal.variable())?;
        Ok(Event {
            care: bit,
            value: if literal.is_positive() { bit } else { 0 },
            contradictory: false,
        })
    }

    /// Resolves a conjunction of arbitrary literals (hypothesis included).
    pub fn event(&self, literals: &[Proposition]) -> Result<Event, ProbError> {
        literals
            .iter()
            .try_fold(Event::TRUE, |acc, lit| Ok(acc.and(self.literal_event(lit)?)))
    }

    /// Resolves an evidence set, rejecting the hypothesis variable.
    pub fn evidence_event(&self, evidence: &EvidenceSet) -> Result<Event, ProbError> {
        let mut event = Event::TRUE;
        for literal in evidence.iter() {
            if literal.variable() == self.schema.hypothesis {
                return Err(ProbError::NotEvidence(literal.variable().to_string()));
            }
            event = event.and(self.literal_event(&literal)?);
        }
        Ok(event)
    }

    /// Resolves a hypothesis literal, rejecting evidence variables.
    pub fn hypothesis_event(&self, hypothesis: &Proposition) -> Result<Event, ProbError> {
        if hypothesis.variable() != self.schema.hypothesis {
            return Err(ProbError::NotHypothesis(hypothesis.variable().to_string()));
        }
        self.literal_event(hypothesis)
    }

    /// Total mass of the entries consistent with `event`.
    pub fn mass(&self, event: Event) -> f64 {
        if event.contradictory {
            return 0.0;
        }
        if event.care == 0 {
            return self.table.iter().sum();
        }
        self.table
            .iter()
            .enumerate()
            .filter(|(i, _)| event.matches(*i))
            .map(|(_, p)| p)
            .sum()
    }

    /// `p(target | given)` for resolved events; errors on zero-mass `given`.
    pub fn conditional_event(&self, target: Event, given: Event) -> Result<f64, ProbError> {
        let denominator = self.mass(given);
        if denominator <= 0.0 {
            return Err(ProbError::ConditioningOnZeroMass);
        }
        let numerator = self.mass(target.and(given));
        Ok((numerator / denominator).min(1.0))
    }

    pub fn probability(&self, literals: &[Proposition]) -> Result<f64, ProbError> {
        Ok(self.mass(self.event(literals)?))
    }

    pub fn conditional(
        &self,
        target: &[Proposition],
        given: &[Proposition],
    ) -> Result<f64, ProbError> {
        self.conditional_event(self.event(target)?, self.event(given)?)
    }

    /// `p(h | given)` for a hypothesis literal and an evidence set.
    pub fn posterior(&self, hypothesis: &Proposition, given: &EvidenceSet) -> Result<f64, ProbError> {
        self.conditional_event(self.hypothesis_event(hypothesis)?, self.evidence_event(given)?)
    }

    /// `p(h | given) / p(~h | given)`.
    pub fn odds(&self, hypothesis: &Proposition, given: &EvidenceSet) -> Result<f64, ProbError> {
        let h = self.hypothesis_event(hypothesis)?;
        let not_h = self.hypothesis_event(&hypothesis.negate())?;
        let g = self.evidence_event(given)?;
        let on = self.mass(h.and(g));
        let off = self.mass(not_h.and(g));
        if on + off <= 0.0 {
            return Err(ProbError::ConditioningOnZeroMass);
        }
        if on <= 0.0 || off <= 0.0 {
            return Err(ProbError::DegenerateBelief {
                posterior: on / (on + off),
            });
        }
        Ok(on / off)
    }

    /// `lambda(h, evidence, prior) = p(evidence | h prior) / p(evidence | ~h prior)`.
    pub fn likelihood_ratio(
        &self,
        hypothesis: &Proposition,
        evidence: &EvidenceSet,
        prior: &EvidenceSet,
    ) -> Result<f64, ProbError> {
        let h = self.hypothesis_event(hypothesis)?;
        let not_h = self.hypothesis_event(&hypothesis.negate())?;
        let e = self.evidence_event(evidence)?;
        let background = self.evidence_event(prior)?;
        let numerator = self.conditional_event(e, h.and(background))?;
        let denominator = self.conditional_event(e, not_h.and(background))?;
        if denominator <= 0.0 || numerator <= 0.0 {
            return Err(ProbError::UndefinedRatio {
                numerator,
                denominator,
            });
        }
        Ok(numerator / denominator)
    }

    /// True iff the joint evidence assignment factorizes into per-variable
    /// marginals within `tol`, both given `h` and given `~h`. Full
    /// factorization implies it for every evidence subset.
    pub fn is_conditionally_independent(&self, hypothesis: &Proposition, tol: f64) -> bool {
        let Ok(h) = self.hypothesis_event(hypothesis) else {
            return false;
        };
        let n = self.arity();
        let Ok(not_h) = self.hypothesis_event(&hypothesis.negate()) else {
            return false;
        };
        for side in [h, not_h] {
            let side_mass = self.mass(side);
            if side_mass <= 0.0 {
                continue;
            }
            let base = side.value as usize;
            let marginals: Vec<f64> = (0..n)
                .map(|k| {
                    let bit = 1u32 << k;
                    let present = Event {
                        care: bit,
                        value: bit,
                        contradictory: false,
                    };
                    self.mass(side.and(present)) / side_mass
                })
                .collect();
            for assignment in 0..(1usize << n) {
                let observed = self.table[base | assignment] / side_mass;
                let product: f64 = marginals
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| if assignment >> k & 1 == 1 { m } else { 1.0 - m })
                    .product();
                if (observed - product).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Every consistent assignment to a subset of the evidence variables,
    /// optionally excluding the empty set.
    pub fn evidence_conjunctions(&self, include_empty: bool) -> Vec<EvidenceSet> {
        let names = self.schema.evidence();
        let n = names.len();
        let mut out = Vec::new();
        // Each variable is absent, positive or negated.
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut rest = code;
            let mut set = EvidenceSet::empty();
            for name in names {
                match rest % 3 {
                    1 => set
                        .insert(Proposition::new(name.clone(), Polarity::Positive))
                        .expect("fresh variable"),
                    2 => set
                        .insert(Proposition::new(name.clone(), Polarity::Negated))
                        .expect("fresh variable"),
                    _ => {}
                }
                rest /= 3;
            }
            if include_empty || !set.is_empty() {
                out.push(set);
            }
        }
        out
    }
}

fn check_arity(schema: &Schema, cap: usize) -> Result<usize, ProbError> {
    let n = schema.arity();
    let cap = cap.min(MAX_SUPPORTED_EVIDENCE);
    if n > cap {
        return Err(ProbError::TooManyVariables { count: n, cap });
    }
    Ok(n)
}

/// Maps a truth-table row (hypothesis first, `true` first) to the
/// internal bit layout.
fn external_to_internal(row: usize, n: usize) -> usize {
    let h = row >> n & 1 == 0;
    let mut index = (h as usize) << n;
    for k in 0..n {
        let present = row >> (n - 1 - k) & 1 == 0;
        index |= (present as usize) << k;
    }
    index
}
