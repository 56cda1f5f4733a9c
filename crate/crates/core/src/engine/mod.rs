//! Rulebases of single-literal rules, case files, batch evaluation under
//! one calculus, and divergence against enumeration.
//!
//! Findings come in three states per case: present (`E`), explicitly absent
//! (`~E`) and unobserved (not listed). Only listed findings fire rules.

mod compare;
mod evaluate;
mod rulebase;

use thiserror::Error;

use crate::calculi::CalcError;
use crate::prob::ProbError;

pub use compare::{
    compare_calculi, CalculusSummary, CompareOptions, DivergenceRow, DivergenceTable, ErrorBasis,
    HypothesisDivergence, COMPARED_CALCULI,
};
pub use evaluate::{
    beliefs_to_csv, beliefs_to_text, evaluate_case, evaluate_cases, ground_truth, Accumulated,
    BeliefState, HypothesisBelief,
};
pub use rulebase::{exhaustive_cases, sampled_cases, CaseFile, CaseRecord, Rule, Rulebase};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error("rulebases cannot carry {0} strengths")]
    UnsupportedKind(crate::calculi::CalculusKind),
    #[error("duplicate rule for evidence {evidence} and hypothesis {hypothesis}")]
    DuplicateRule { evidence: String, hypothesis: String },
    #[error("duplicate rule id `{0}`")]
    DuplicateRuleId(String),
    #[error("duplicate case id `{0}`")]
    DuplicateCaseId(String),
    #[error("rule `{0}` must conclude a positive hypothesis literal")]
    NegatedHypothesis(String),
    #[error("variable `{0}` is used both as evidence and as a hypothesis")]
    RoleConflict(String),
    #[error("case `{case}` observes `{variable}`, which no rule mentions")]
    UnknownFinding { case: String, variable: String },
    #[error("model for `{hypothesis}` does not cover `{variable}`")]
    UncoveredVariable { hypothesis: String, variable: String },
    #[error("no models to compare")]
    NoModels,
    #[error("models share hypothesis name `{0}`")]
    DuplicateHypothesis(String),
    #[error("{0}")]
    Malformed(String),
}
