//! Belief-update calculi over exactly enumerated discrete distributions.
//!
//! The crate is organised bottom-up:
//!
//! - [`prob`]: joint probability tables over one binary hypothesis and `n`
//!   binary evidence variables, naive-Bayes expansion, and exact queries
//!   (marginals, conditionals, odds, likelihood ratios).
//! - [`calculi`]: the update measures built on top of those queries
//!   (likelihood ratio, weight of evidence, certainty factors, evoking
//!   strengths, raw posteriors) and their combination functions.
//! - [`audit`]: scenario families and the axiom checks (basic update
//!   property, modularity) that produce witness-bearing reports.
//! - [`engine`]: rulebases, case records and batch evaluation against the
//!   enumeration ground truth.
//!
//! Every value in the crate is immutable after construction and every
//! operation is a pure function.

pub mod audit;
pub mod calculi;
pub mod engine;
pub mod prob;

pub use calculi::{CalcError, CalculusKind, CalculusValue, EvokingThresholds, LogBase, UpdateMeasure};
pub use prob::{
    EvidenceSet, JointDistribution, ModelSpec, NaiveBayesModel, Polarity, ProbError, Proposition,
    Schema,
};
