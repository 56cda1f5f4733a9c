//! Exact representation and querying of small discrete joint distributions.

mod distribution;
mod error;
mod io;
mod naive_bayes;
mod proposition;

pub use distribution::{
    Event, JointDistribution, Schema, DEFAULT_MAX_EVIDENCE, MAX_SUPPORTED_EVIDENCE,
    NORMALIZATION_TOLERANCE,
};
pub use error::ProbError;
pub use io::{ModelSpec, TableSpec};
pub use naive_bayes::{Finding, NaiveBayesModel};
pub use proposition::{EvidenceSet, Polarity, Proposition};
pub(crate) use proposition::valid_name;
