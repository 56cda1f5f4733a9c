use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::prob::{EvidenceSet, ModelSpec, Proposition};

use super::ScenarioFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Combined update is some function of the two component updates.
    UpdateProperty,
    /// Update does not depend on prior evidence.
    Modularity,
    /// Posterior-as-update is modular only where evidence is marginally
    /// independent of the hypothesis.
    MarginalIndependence,
    /// `CF(H,E) ~ p(H|E)` for small priors.
    CfLimit,
    MycinCounterexample,
    EvokingModularity,
}

impl Axiom {
    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::UpdateProperty => "update_property",
            Axiom::Modularity => "modularity",
            Axiom::MarginalIndependence => "marginal_independence",
            Axiom::CfLimit => "cf_limit",
            Axiom::MycinCounterexample => "mycin_counterexample",
            Axiom::EvokingModularity => "evoking_modularity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessRole {
    /// `U(H,E,e)` differs from `U(H,E,∅)`.
    Violation,
    /// Matching component updates with different combined updates.
    Collision,
    /// Posteriors differ but the bucketed values agree.
    Masked,
}

/// A replayable scenario demonstrating a finding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub role: WitnessRole,
    pub scenario_id: usize,
    pub scenario: String,
    pub model: ModelSpec,
    pub hypothesis: Proposition,
    /// `E`, or `E1` for collisions.
    pub evidence: EvidenceSet,
    /// `E2` for collisions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_evidence: Option<EvidenceSet>,
    pub prior_evidence: EvidenceSet,
    pub observed: BTreeMap<String, f64>,
    pub magnitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partner: Option<Box<Witness>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedScenario {
    pub scenario_id: usize,
    pub reason: String,
}

/// A named number with the chain of arithmetic that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub derivation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub measure: String,
    pub axiom: Axiom,
    pub family: ScenarioFamily,
    pub seed: Option<u64>,
    pub tolerance: f64,
    pub match_tolerance: Option<f64>,
    pub verdict: Verdict,
    pub scenarios_total: usize,
    pub scenarios_tested: usize,
    pub scenarios_skipped: usize,
    pub comparisons: usize,
    pub max_deviation: f64,
    pub skipped: Vec<SkippedScenario>,
    pub witnesses: Vec<Witness>,
    pub counts: BTreeMap<String, usize>,
    pub quantities: Vec<Quantity>,
    pub notes: Vec<String>,
    pub conclusion: String,
}

impl AuditReport {
    pub(crate) fn new(measure: impl Into<String>, axiom: Axiom, family: &ScenarioFamily, tolerance: f64) -> Self {
        Self {
            measure: measure.into(),
            axiom,
            family: family.clone(),
            seed: family.seed(),
            tolerance,
            match_tolerance: None,
            verdict: Verdict::Holds,
            scenarios_total: 0,
            scenarios_tested: 0,
            scenarios_skipped: 0,
            comparisons: 0,
            max_deviation: 0.0,
            skipped: Vec::new(),
            witnesses: Vec::new(),
            counts: BTreeMap::new(),
            quantities: Vec::new(),
            notes: Vec::new(),
            conclusion: String::new(),
        }
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    pub fn quantity(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    pub fn count(&self, name: &str) -> usize {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub(crate) fn push_quantity(&mut self, name: &str, value: f64, derivation: impl Into<String>) {
        self.quantities.push(Quantity {
            name: name.to_string(),
            value,
            derivation: derivation.into(),
        });
    }

    /// Human-readable rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = match self.verdict {
            Verdict::Holds => "HOLDS",
            Verdict::Violated => "VIOLATED",
        };
        let _ = writeln!(out, "== {} / {} : {verdict}", self.measure, self.axiom.as_str());
        let _ = writeln!(out, "family      : {}", self.family);
        let _ = write!(out, "tolerance   : {:e}", self.tolerance);
        if let Some(m) = self.match_tolerance {
            let _ = write!(out, " (match {m:e})");
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "scenarios   : {} total, {} tested, {} skipped; {} comparisons",
            self.scenarios_total, self.scenarios_tested, self.scenarios_skipped, self.comparisons
        );
        let _ = writeln!(out, "max deviation: {:.6e}", self.max_deviation);
        for (k, v) in &self.counts {
            let _ = writeln!(out, "  {k}: {v}");
        }
        if !self.quantities.is_empty() {
            out.push_str("quantities:\n");
            for q in &self.quantities {
                let _ = writeln!(out, "  {:<28} = {:<12.6}  {}", q.name, q.value, q.derivation);
            }
        }
        for (i, w) in self.witnesses.iter().enumerate() {
            let _ = writeln!(out, "witness #{i} ({:?}):", w.role);
            write_witness(&mut out, w, "  ");
            if let Some(p) = &w.partner {
                let _ = writeln!(out, "  partner:");
                write_witness(&mut out, p, "    ");
            }
        }
        if !self.skipped.is_empty() {
            let _ = writeln!(out, "skipped scenarios:");
            for s in &self.skipped {
                let _ = writeln!(out, "  #{}: {}", s.scenario_id, s.reason);
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        if !self.conclusion.is_empty() {
            let _ = writeln!(out, "conclusion: {}", self.conclusion);
        }
        out
    }
}

fn write_witness(out: &mut String, w: &Witness, indent: &str) {
    let _ = write!(
        out,
        "{indent}scenario {} [{}]: H={} E={}",
        w.scenario_id, w.scenario, w.hypothesis, w.evidence
    );
    if let Some(e2) = &w.second_evidence {
        let _ = write!(out, " E2={e2}");
    }
    let _ = writeln!(out, " e={} magnitude={:.6e}", w.prior_evidence, w.magnitude);
    for (k, v) in &w.observed {
        let _ = writeln!(out, "{indent}  {k} = {v:.9}");
    }
}
