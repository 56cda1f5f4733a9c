//! JSON model files.
//!
//! A model file holds exactly one of
//!
//! ```json
//! {"table": {"hypothesis": "H", "evidence": ["E1"], "entries": [0.4, 0.1, 0.1, 0.4]}}
//! {"naive_bayes": {"hypothesis": "H", "prior": 0.01,
//!                  "findings": [{"name": "E1", "p_given_h": 0.99, "p_given_not_h": 0.01}]}}
//! ```
//!
//! Table entries are in truth-table order, hypothesis first, `true` before
//! `false`. `hypothesis` defaults to `"H"` in both forms.

use serde::{Deserialize, Serialize};

use super::{JointDistribution, NaiveBayesModel, ProbError, Schema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    #[serde(default = "default_hypothesis")]
    pub hypothesis: String,
    pub evidence: Vec<String>,
    pub entries: Vec<f64>,
}

fn default_hypothesis() -> String {
    "H".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Table(TableSpec),
    NaiveBayes(NaiveBayesModel),
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self, ProbError> {
        serde_json::from_str(text).map_err(|e| ProbError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model specs always serialize")
    }

    pub fn to_joint(&self) -> Result<JointDistribution, ProbError> {
        match self {
            ModelSpec::Table(t) => {
                let schema = Schema::new(t.hypothesis.clone(), t.evidence.iter().cloned())?;
                JointDistribution::from_table(schema, &t.entries)
            }
            ModelSpec::NaiveBayes(m) => JointDistribution::from_naive_bayes(m),
        }
    }

    pub fn hypothesis(&self) -> &str {
        match self {
            ModelSpec::Table(t) => &t.hypothesis,
            ModelSpec::NaiveBayes(m) => m.hypothesis(),
        }
    }
}

impl From<&JointDistribution> for ModelSpec {
    fn from(dist: &JointDistribution) -> Self {
        ModelSpec::Table(TableSpec {
            hypothesis: dist.schema().hypothesis().to_string(),
            evidence: dist.schema().evidence().to_vec(),
            entries: dist.entries(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Finding;

    #[test]
    fn parses_both_forms() {
        let table = ModelSpec::from_json(
            r#"{"table": {"evidence": ["E"], "entries": [0.25, 0.25, 0.25, 0.25]}}"#,
        )
        .unwrap();
        assert_eq!(table.hypothesis(), "H");
        assert_eq!(table.to_joint().unwrap().arity(), 1);

        let nb = ModelSpec::from_json(
            r#"{"naive_bayes": {"prior": 0.01, "findings": [
                {"name": "E1", "p_given_h": 0.99, "p_given_not_h": 0.01}]}}"#,
        )
        .unwrap();
        assert!(matches!(nb, ModelSpec::NaiveBayes(_)));
    }

    #[test]
    fn rejects_malformed() {
        assert!(ModelSpec::from_json("{}").is_err());
        assert!(ModelSpec::from_json(r#"{"tabel": {}}"#).is_err());
        assert!(matches!(
            ModelSpec::from_json(r#"{"table": {"evidence": ["E"], "entries": [-0.1, 0.5, 0.3, 0.3]}}"#)
                .unwrap()
                .to_joint(),
            Err(ProbError::NegativeProbability { .. })
        ));
    }

    #[test]
    fn table_round_trip_within_1e15() {
        let model = NaiveBayesModel::new(
            "D",
            0.137,
            vec![Finding::new("F", 0.3, 0.71), Finding::new("G", 0.93, 0.05)],
        )
        .unwrap();
        let dist = JointDistribution::from_naive_bayes(&model).unwrap();
        let text = ModelSpec::from(&dist).to_json();
        let back = ModelSpec::from_json(&text).unwrap().to_joint().unwrap();
        for (a, b) in dist.entries().iter().zip(back.entries()) {
            assert!((a - b).abs() <= 1e-15);
        }
        let nb_text = ModelSpec::NaiveBayes(model.clone()).to_json();
        assert_eq!(ModelSpec::from_json(&nb_text).unwrap(), ModelSpec::NaiveBayes(model));
    }
}
